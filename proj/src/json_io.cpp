#include "xkb/json_io.hpp"

#include <set>

namespace xkb {

namespace {

Json witnesses(const Schema& schema, const std::vector<ConflictWitness>& ws) {
  Json out = Json::array();
  for (const auto& w : ws) out.push_back(to_json(schema, w));
  return out;
}

std::set<std::string> ids_of(const ExplanationKB& kb) {
  std::set<std::string> out;
  for (const auto& r : kb.rules()) out.insert(r.id);
  return out;
}

}  // namespace

Json to_json(const Schema& schema, const DataPoint& point) {
  Json out = Json::object();
  for (std::size_t f = 0; f < schema.feature_count(); ++f)
    out[schema.features()[f].name] =
        schema.features()[f].domain[point.values[f]];
  return out;
}

Json to_json(const Schema& schema, const ConflictWitness& w) {
  return {{"rule_a", w.rule_a},
          {"rule_b", w.rule_b},
          {"point", to_json(schema, w.point)},
          {"heads_a", w.heads_a.names(schema)},
          {"heads_b", w.heads_b.names(schema)}};
}

Json to_json(const Schema& schema, const ConsistencyReport& report) {
  return {{"consistent", report.consistent},
          {"conflict_edges", report.edges.size()},
          {"edges", witnesses(schema, report.edges)},
          {"self_conflicts", witnesses(schema, report.self_conflicts)}};
}

Json to_json(const Schema& schema, const CompletenessReport& report) {
  Json missing = Json::array();
  for (const auto& p : report.missing) missing.push_back(to_json(schema, p));
  return {{"complete", report.complete},
          {"missing", missing},
          {"extras", report.extras}};
}

Json to_json(const Schema& schema, const EnforcementReport& report) {
  Json out = {{"holds", report.holds}};
  if (report.rule_id) out["rule"] = *report.rule_id;
  if (report.counterexample)
    out["counterexample"] = to_json(schema, *report.counterexample);
  return out;
}

Json to_json(const Schema& schema, const ValidationReport& report) {
  Json tau = Json::object();
  for (const auto& [id, v] : report.ke_tau) tau[id] = to_json(v);
  return {{"ok", report.ok()},
          {"kd_complete", report.kd_complete},
          {"kd_coherent", report.kd_coherent},
          {"kd_consistent", report.kd_consistent},
          {"combined_consistent", report.combined_consistent},
          {"completeness", to_json(schema, report.completeness)},
          {"consistency", to_json(schema, report.consistency)},
          {"self_inconsistent", report.self_inconsistent},
          {"ke_tau", tau},
          {"warnings", report.warnings}};
}

Json to_json(const CoherenceValue& tau) {
  return {{"vacuous", tau.vacuous},
          {"numerator", tau.numerator},
          {"denominator", tau.denominator},
          {"ratio", tau.ratio()},
          {"coherent", tau.coherent()}};
}

Json to_json(const KBMetrics& m) {
  Json tau = Json::object();
  for (const auto& [id, v] : m.per_rule_tau) tau[id] = to_json(v);
  return {{"conflict_edge_count", m.conflict_edge_count},
          {"drift", m.drift},
          {"drift_points", m.drift_points},
          {"ke_min_tau", m.ke_min_tau},
          {"per_rule_tau", tau}};
}

Json to_json(const Rule& rule) {
  return {{"id", rule.id},
          {"origin", to_string(rule.origin)},
          {"body", render(rule.body)},
          {"head", render(rule.head)},
          {"text", render(rule)}};
}

Json to_json(const ExplanationKB& kb) {
  Json kd = Json::array(), ke = Json::array();
  for (const auto& r : kb.kd()) kd.push_back(to_json(r));
  for (const auto& r : kb.ke()) ke.push_back(to_json(r));
  return {{"kd", kd}, {"ke", ke}, {"text", render(kb.to_document())}};
}

Json to_json(const RevisionTrace& trace) {
  Json weakened = Json::array();
  for (const auto& w : trace.weakened)
    weakened.push_back({{"before", to_json(w.before)}, {"after", to_json(w.after)}});
  Json out = {{"operator", trace.operator_name},
              {"input", to_json(trace.input)},
              {"accepted", trace.accepted},
              {"removed", trace.removed},
              {"weakened", weakened},
              {"coverage_shrink", trace.coverage_shrink},
              {"notes", trace.notes}};
  out["effective_input"] =
      trace.effective_input ? to_json(*trace.effective_input) : Json(nullptr);
  return out;
}

Json to_json(const Schema& schema, const RevisionOutcome& outcome) {
  return {{"outcome", outcome.trace.accepted ? "accepted" : "rejected"},
          {"trace", to_json(outcome.trace)},
          {"conflicts_found", witnesses(schema, outcome.conflicts_found)},
          {"metrics", to_json(outcome.metrics_after)},
          {"kb", to_json(outcome.kb_after)}};
}

Json to_json(const Verdict& v) {
  Json out = {{"status", to_string(v.status)}};
  if (v.witness) out["witness"] = *v.witness;
  return out;
}

Json to_json(const PostulateReport& report) {
  Json out = Json::object();
  for (const auto& [id, v] : report) out[std::string(to_string(id))] = to_json(v);
  return out;
}

Json to_json(const Schema& schema, const OracleResult& result) {
  Json out = {{"holds", result.holds}, {"sets", result.sets}};
  if (result.witness_point)
    out["witness_point"] = to_json(schema, *result.witness_point);
  if (!result.witness_rules.empty()) out["witness_rules"] = result.witness_rules;
  return out;
}

Json revision_diff(const ExplanationKB& before, const RevisionOutcome& outcome) {
  auto old_ids = ids_of(before);
  auto new_ids = ids_of(outcome.kb_after);
  std::set<std::string> weakened_from, weakened_to;
  Json weakened = Json::array();
  for (const auto& w : outcome.trace.weakened) {
    weakened_from.insert(w.before.id);
    weakened_to.insert(w.after.id);
    weakened.push_back({{"id", w.before.id},
                        {"new_id", w.after.id},
                        {"before", render(w.before)},
                        {"after", render(w.after)}});
  }
  Json removed = Json::array(), added = Json::array();
  for (const auto& r : before.rules())
    if (!new_ids.count(r.id) && !weakened_from.count(r.id)) removed.push_back(r.id);
  for (const auto& r : outcome.kb_after.rules())
    if (!old_ids.count(r.id) && !weakened_to.count(r.id))
      added.push_back({{"id", r.id}, {"text", render(r)}});
  return {{"removed", removed}, {"added", added}, {"weakened", weakened}};
}

}  // namespace xkb
