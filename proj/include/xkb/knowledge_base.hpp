#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "xkb/rule.hpp"
#include "xkb/semantics.hpp"
#include "xkb/table.hpp"

namespace xkb {

/// `{"features":[{"name":...,"domain":[...]}],"classes":[...]}`
Schema parse_schema_json(std::string_view text);
std::string schema_to_json(const Schema& schema);

/// CSV with a header of the feature names in schema order followed by
/// `class`. Values are taken verbatim; surrounding double quotes are removed.
ClassifierTable load_table(std::string_view csv, const Schema& schema);
std::string table_to_csv(const ClassifierTable& table);

/// One instance rule per row, ids d0001, d0002, ...
std::vector<Rule> derive_kd(const ClassifierTable& table);

/// Inverse of derive_kd: one row per instance rule. Throws ValidationError on
/// a rule that is not an instance rule or two rules labelling one point
/// differently.
ClassifierTable table_from_kd(const Schema& schema, std::span<const Rule> kd);

/// K_M = K_d ∪ K_e. Construction enforces the instance predicate on K_d and
/// unique ids across both parts.
class ExplanationKB {
 public:
  ExplanationKB() = default;
  ExplanationKB(Schema schema, std::vector<Rule> kd, std::vector<Rule> ke);

  /// Data-origin rules go to K_d, every other rule to K_e.
  static ExplanationKB from_document(const Document& doc);
  Document to_document() const;

  const Schema& schema() const { return schema_; }
  const std::vector<Rule>& kd() const { return kd_; }
  const std::vector<Rule>& ke() const { return ke_; }
  /// K_d followed by K_e.
  std::vector<Rule> rules() const;
  std::size_t size() const { return kd_.size() + ke_.size(); }
  const Rule* find(std::string_view id) const;
  bool in_kd(std::string_view id) const;

 private:
  Schema schema_;
  std::vector<Rule> kd_;
  std::vector<Rule> ke_;
};

struct ValidationReport {
  bool kd_complete = false;
  bool kd_coherent = false;
  bool kd_consistent = false;
  bool combined_consistent = false;
  CompletenessReport completeness;
  ConsistencyReport consistency;
  std::vector<std::string> self_inconsistent;
  std::map<std::string, CoherenceValue> ke_tau;
  std::vector<std::string> warnings;

  /// No warnings at all.
  bool ok() const { return warnings.empty(); }
};

/// Logical defects become report entries; only a schema mismatch throws.
ValidationReport validate(const ExplanationKB& kb, const ClassifierTable& table,
                          const Scope& scope);

struct KBMetrics {
  std::size_t conflict_edge_count = 0;
  std::map<std::string, CoherenceValue> per_rule_tau;
  /// Fraction of D whose label M(x) is excluded by some covering rule.
  double drift = 0.0;
  std::size_t drift_points = 0;
  /// Minimum τ ratio over K_e (1 when K_e is empty or all vacuous).
  double ke_min_tau = 1.0;
};

KBMetrics metrics(const ExplanationKB& kb, const ClassifierTable& table,
                  const Scope& scope);

}  // namespace xkb
