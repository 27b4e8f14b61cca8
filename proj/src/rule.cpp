#include "xkb/rule.hpp"

#include <set>

#include "xkb/error.hpp"

namespace xkb {

std::string_view to_string(Origin origin) {
  switch (origin) {
    case Origin::kData:
      return "data";
    case Origin::kExplanation:
      return "explanation";
    case Origin::kFeedback:
      return "feedback";
    case Origin::kDerived:
      return "derived";
  }
  return "explanation";
}

std::optional<Origin> origin_from_string(std::string_view text) {
  if (text == "data") return Origin::kData;
  if (text == "explanation") return Origin::kExplanation;
  if (text == "feedback") return Origin::kFeedback;
  if (text == "derived") return Origin::kDerived;
  return std::nullopt;
}

Rule canonicalize(const Rule& rule) {
  return Rule{rule.id, canonicalize(rule.body), canonicalize(rule.head),
              rule.origin};
}

std::string rule_key(const Rule& rule) {
  return render(canonicalize(rule.body)) + " => " +
         render(canonicalize(rule.head));
}

bool is_instance_rule(const Schema& schema, const Rule& rule) {
  if (!rule.head.is_atom()) return false;
  std::vector<const FeatureFormula*> atoms;
  if (rule.body.is_atom()) {
    atoms.push_back(&rule.body);
  } else if (rule.body.kind() == NodeKind::kAnd) {
    for (const auto& c : rule.body.children()) {
      if (!c.is_atom()) return false;
      atoms.push_back(&c);
    }
  } else {
    return false;
  }
  if (atoms.size() != schema.feature_count()) return false;
  std::set<std::string> seen;
  for (const auto* a : atoms) {
    if (!seen.insert(a->atom().feature).second) return false;
  }
  return true;
}

namespace {

void check_body(const Schema& schema, const FeatureFormula& f) {
  if (f.is_atom()) {
    auto feature = schema.feature_index(f.atom().feature);
    if (!feature) throw ValidationError("unknown feature " + f.atom().feature);
    if (!schema.value_index(*feature, f.atom().value))
      throw ValidationError("unknown value " + f.atom().value +
                            " for feature " + f.atom().feature);
    return;
  }
  for (const auto& c : f.children()) check_body(schema, c);
}

void check_head(const Schema& schema, const ClassFormula& f) {
  if (f.is_atom()) {
    if (!schema.class_index(f.atom().name))
      throw ValidationError("unknown class " + f.atom().name);
    return;
  }
  for (const auto& c : f.children()) check_head(schema, c);
}

}  // namespace

void check_symbols(const Schema& schema, const Rule& rule) {
  check_body(schema, rule.body);
  check_head(schema, rule.head);
}

std::string render(const Rule& rule) {
  const char* keyword = rule.origin == Origin::kData ? "data" : "rule";
  return std::string(keyword) + " " + rule.id + ": " + render(rule.body) +
         " => " + render(rule.head) + ";";
}

std::string render(const Schema& schema) {
  std::string out = "schema {\n";
  for (const auto& f : schema.features()) {
    out += "  feature " + f.name + ": {";
    for (std::size_t i = 0; i < f.domain.size(); ++i) {
      if (i) out += ", ";
      out += render_value(f.domain[i]);
    }
    out += "};\n";
  }
  out += "  classes {";
  for (std::size_t i = 0; i < schema.classes().size(); ++i) {
    if (i) out += ", ";
    out += schema.classes()[i];
  }
  out += "};\n}\n";
  return out;
}

std::string render(const Document& doc) {
  std::string out = render(doc.schema);
  for (const auto& r : doc.rules) out += render(r) + "\n";
  return out;
}

}  // namespace xkb
