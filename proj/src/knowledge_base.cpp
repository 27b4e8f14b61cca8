#include "xkb/knowledge_base.hpp"

#include <cstdio>
#include <set>

#include "json.hpp"

#include "xkb/error.hpp"

namespace xkb {

namespace {

using nlohmann::json;

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        cur += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += ch;
    }
  }
  if (quoted) throw ValidationError("unterminated quote");
  out.push_back(std::move(cur));
  return out;
}

std::string csv_field(const std::string& value) {
  if (value.find_first_of(",\"\n\r") == std::string::npos) return value;
  std::string out = "\"";
  for (char ch : value) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

std::vector<std::string_view> lines_of(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    out.push_back(line);
    start = end + 1;
  }
  while (!out.empty() && out.back().empty()) out.pop_back();
  return out;
}

void check_unique_ids(const std::vector<Rule>& kd, const std::vector<Rule>& ke) {
  std::set<std::string> ids;
  for (const auto* part : {&kd, &ke})
    for (const auto& r : *part)
      if (!ids.insert(r.id).second)
        throw ValidationError("duplicate rule id " + r.id);
}

}  // namespace

Schema parse_schema_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("schema JSON: ") + e.what());
  }
  try {
    std::vector<FeatureDecl> features;
    for (const auto& f : j.at("features"))
      features.push_back({f.at("name").get<std::string>(),
                          f.at("domain").get<std::vector<std::string>>()});
    return Schema(std::move(features),
                  j.at("classes").get<std::vector<std::string>>());
  } catch (const json::exception& e) {
    throw ValidationError(std::string("schema JSON: ") + e.what());
  }
}

std::string schema_to_json(const Schema& schema) {
  json j;
  j["features"] = json::array();
  for (const auto& f : schema.features())
    j["features"].push_back({{"name", f.name}, {"domain", f.domain}});
  j["classes"] = schema.classes();
  return j.dump();
}

ClassifierTable load_table(std::string_view csv, const Schema& schema) {
  const auto lines = lines_of(csv);
  if (lines.empty()) throw ValidationError("CSV: missing header");
  const auto header = split_csv_line(lines[0]);
  std::vector<std::string> expected;
  for (const auto& f : schema.features()) expected.push_back(f.name);
  expected.push_back("class");
  if (header != expected) {
    std::string want;
    for (const auto& h : expected) want += (want.empty() ? "" : ",") + h;
    throw ValidationError("CSV: header must be " + want);
  }
  std::vector<ClassifierTable::Row> rows;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const std::string where = "CSV line " + std::to_string(i + 1) + ": ";
    auto fields = split_csv_line(lines[i]);
    if (fields.size() != expected.size())
      throw ValidationError(where + "expected " + std::to_string(expected.size()) +
                            " fields, got " + std::to_string(fields.size()));
    const std::string label = fields.back();
    fields.pop_back();
    auto cls = schema.class_index(label);
    if (!cls) throw ValidationError(where + "unknown class " + label);
    try {
      rows.push_back({make_point(schema, fields), *cls});
    } catch (const ValidationError& e) {
      throw ValidationError(where + e.what());
    }
  }
  return ClassifierTable(schema, std::move(rows));
}

std::string table_to_csv(const ClassifierTable& table) {
  const Schema& s = table.schema();
  std::string out;
  for (const auto& f : s.features()) out += csv_field(f.name) + ",";
  out += "class\n";
  for (const auto& row : table.rows()) {
    for (std::size_t f = 0; f < s.feature_count(); ++f)
      out += csv_field(s.features()[f].domain[row.point.values[f]]) + ",";
    out += csv_field(s.classes()[row.label]) + "\n";
  }
  return out;
}

std::vector<Rule> derive_kd(const ClassifierTable& table) {
  const Schema& s = table.schema();
  std::vector<Rule> out;
  for (const auto& row : table.rows()) {
    std::vector<FeatureFormula> atoms;
    for (std::size_t f = 0; f < s.feature_count(); ++f)
      atoms.push_back(feature_eq(s.features()[f].name,
                                 s.features()[f].domain[row.point.values[f]]));
    char id[16];
    std::snprintf(id, sizeof id, "d%04zu", out.size() + 1);
    out.push_back({id, FeatureFormula::conj(std::move(atoms)),
                   class_is(s.classes()[row.label]), Origin::kData});
  }
  return out;
}

ClassifierTable table_from_kd(const Schema& schema, std::span<const Rule> kd) {
  std::vector<ClassifierTable::Row> rows;
  for (const auto& r : kd) {
    check_symbols(schema, r);
    if (!is_instance_rule(schema, r))
      throw ValidationError("rule " + r.id + " is not an instance rule");
    auto point = satisfiable(r.body, schema);
    auto heads = class_extent(r.head, schema);
    std::size_t label = 0;
    while (!heads.contains(label)) ++label;
    rows.push_back({*point, label});
  }
  return ClassifierTable(schema, std::move(rows));
}

ExplanationKB::ExplanationKB(Schema schema, std::vector<Rule> kd,
                             std::vector<Rule> ke)
    : schema_(std::move(schema)), kd_(std::move(kd)), ke_(std::move(ke)) {
  check_unique_ids(kd_, ke_);
  for (const auto& r : kd_) {
    check_symbols(schema_, r);
    if (!is_instance_rule(schema_, r))
      throw ValidationError("rule " + r.id + " in K_d is not an instance rule");
  }
  for (const auto& r : ke_) check_symbols(schema_, r);
}

ExplanationKB ExplanationKB::from_document(const Document& doc) {
  std::vector<Rule> kd, ke;
  for (const auto& r : doc.rules) (r.origin == Origin::kData ? kd : ke).push_back(r);
  return ExplanationKB(doc.schema, std::move(kd), std::move(ke));
}

Document ExplanationKB::to_document() const { return {schema_, rules()}; }

std::vector<Rule> ExplanationKB::rules() const {
  std::vector<Rule> out = kd_;
  out.insert(out.end(), ke_.begin(), ke_.end());
  return out;
}

const Rule* ExplanationKB::find(std::string_view id) const {
  for (const auto* part : {&kd_, &ke_})
    for (const auto& r : *part)
      if (r.id == id) return &r;
  return nullptr;
}

bool ExplanationKB::in_kd(std::string_view id) const {
  for (const auto& r : kd_)
    if (r.id == id) return true;
  return false;
}

ValidationReport validate(const ExplanationKB& kb, const ClassifierTable& table,
                          const Scope& scope) {
  if (!(kb.schema() == table.schema()) || !(kb.schema() == scope.schema()))
    throw ValidationError("knowledge base, table and scope use different schemas");
  ValidationReport report;
  report.completeness = check_complete(kb.kd(), table);
  report.kd_complete = report.completeness.complete;
  if (!report.kd_complete) report.warnings.push_back("K_d is not complete for the table");

  report.kd_coherent = true;
  for (const auto& r : kb.kd()) {
    if (!tau_coherence(r, table).coherent()) {
      report.kd_coherent = false;
      report.warnings.push_back("data rule " + r.id + " is not coherent");
    }
  }

  report.kd_consistent = is_consistent(kb.kd(), scope);
  if (!report.kd_consistent) report.warnings.push_back("K_d is inconsistent");

  const auto all = kb.rules();
  report.consistency = check_consistency(all, scope);
  report.combined_consistent = report.consistency.consistent;
  for (const auto& w : report.consistency.self_conflicts) {
    report.self_inconsistent.push_back(w.rule_a);
    report.warnings.push_back("rule " + w.rule_a + " has an empty head extent");
  }
  for (const auto& e : report.consistency.edges)
    report.warnings.push_back("conflict between " + e.rule_a + " and " + e.rule_b);

  for (const auto& r : kb.ke()) {
    auto tau = tau_coherence(r, table);
    report.ke_tau.emplace(r.id, tau);
    if (!tau.coherent()) {
      char buf[64];
      std::snprintf(buf, sizeof buf, " is not coherent (tau = %zu/%zu)",
                    tau.numerator, tau.denominator);
      report.warnings.push_back("rule " + r.id + buf);
    }
  }
  return report;
}

KBMetrics metrics(const ExplanationKB& kb, const ClassifierTable& table,
                  const Scope& scope) {
  KBMetrics m;
  const auto all = kb.rules();
  auto report = check_consistency(all, scope);
  m.conflict_edge_count = report.edges.size() + report.self_conflicts.size();
  for (const auto& r : all) m.per_rule_tau.emplace(r.id, tau_coherence(r, table));
  for (const auto& r : kb.ke())
    m.ke_min_tau = std::min(m.ke_min_tau, m.per_rule_tau.at(r.id).ratio());

  std::vector<std::pair<CompiledFormula, ClassSet>> compiled;
  for (const auto& r : all)
    compiled.emplace_back(CompiledFormula(table.schema(), r.body),
                          class_extent(r.head, table.schema()));
  for (const auto& row : table.rows()) {
    for (const auto& [body, head] : compiled) {
      if (body.eval(row.point.values) && !head.contains(row.label)) {
        ++m.drift_points;
        break;
      }
    }
  }
  m.drift = table.empty() ? 0.0
                          : static_cast<double>(m.drift_points) / table.size();
  return m;
}

}  // namespace xkb
