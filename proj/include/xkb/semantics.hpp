#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "xkb/rule.hpp"
#include "xkb/table.hpp"

namespace xkb {

/// Subset of the schema's classes.
class ClassSet {
 public:
  ClassSet() = default;
  explicit ClassSet(std::size_t universe) : bits_(universe, false) {}
  static ClassSet all(std::size_t universe);

  std::size_t universe() const { return bits_.size(); }
  bool contains(std::size_t c) const { return bits_[c]; }
  void insert(std::size_t c) { bits_[c] = true; }
  bool empty() const;
  bool full() const;
  std::size_t count() const;

  ClassSet operator&(const ClassSet& other) const;
  ClassSet operator|(const ClassSet& other) const;
  ClassSet operator~() const;
  bool subset_of(const ClassSet& other) const;
  bool intersects(const ClassSet& other) const;
  bool operator==(const ClassSet&) const = default;

  std::vector<std::string> names(const Schema& schema) const;

 private:
  std::vector<bool> bits_;
};

/// Where feature formulas are interpreted: all of V, or only the known
/// data points D of a classifier table.
class Scope {
 public:
  static Scope full_universe(Schema schema);
  static Scope dataset(std::shared_ptr<const ClassifierTable> table);
  static Scope dataset(ClassifierTable table);

  bool is_dataset() const { return table_ != nullptr; }
  const Schema& schema() const { return *schema_; }
  const ClassifierTable& table() const { return *table_; }
  std::shared_ptr<const ClassifierTable> table_ptr() const { return table_; }
  std::string_view name() const { return is_dataset() ? "dataset" : "full"; }

 private:
  std::shared_ptr<const Schema> schema_;
  std::shared_ptr<const ClassifierTable> table_;
};

/// Index-resolved feature formula for fast pointwise and partial evaluation.
class CompiledFormula {
 public:
  static constexpr std::uint32_t kUnassigned = 0xffffffffu;
  enum class Truth { kFalse, kTrue, kUnknown };

  CompiledFormula(const Schema& schema, const FeatureFormula& formula);

  bool eval(std::span<const std::uint32_t> point) const;
  /// Kleene evaluation; kUnassigned features are unknown.
  Truth eval_partial(std::span<const std::uint32_t> assignment) const;
  /// Mentioned feature indices, ascending.
  const std::vector<std::size_t>& features() const { return features_; }

 private:
  struct Node {
    NodeKind kind;
    std::uint32_t feature = 0;
    std::uint32_t value = 0;
    std::vector<std::uint32_t> children;
  };
  std::uint32_t build(const Schema& schema, const FeatureFormula& f);
  bool eval_node(std::uint32_t n, std::span<const std::uint32_t> point) const;
  Truth partial_node(std::uint32_t n,
                     std::span<const std::uint32_t> assignment) const;

  std::vector<Node> nodes_;
  std::uint32_t root_ = 0;
  std::vector<std::size_t> features_;
};

/// A formula constrained to be true (positive) or false.
struct Literal {
  const CompiledFormula* formula;
  bool positive = true;
};

/// Backtracking search over the features the literals mention. Unmentioned
/// features of the witness take their first domain value.
std::optional<DataPoint> find_model(const Schema& schema,
                                    std::span<const Literal> literals);

/// find_model in FullUniverse scope; first matching row of D in Dataset scope.
std::optional<DataPoint> find_point(const Scope& scope,
                                    std::span<const Literal> literals);

bool eval(const Schema& schema, const FeatureFormula& formula,
          const DataPoint& point);

/// Satisfying points of a formula. Dataset scope lists rows of D. Full scope
/// lists assignments of the mentioned features (unmentioned ones at their
/// first value) and a multiplier for the free features.
struct Extent {
  std::vector<std::size_t> bound_features;
  std::vector<DataPoint> points;
  std::uint64_t multiplier = 1;

  std::uint64_t count() const { return points.size() * multiplier; }
  bool empty() const { return points.empty(); }
};

/// Throws LimitError if the mentioned-feature grid exceeds 2^20 cells.
Extent extent(const FeatureFormula& formula, const Scope& scope);

/// Every point of V represented by a full-universe extent, expanded over the
/// free features.
std::vector<DataPoint> expand(const Schema& schema, const Extent& e);

ClassSet class_extent(const ClassFormula& formula, const Schema& schema);

std::optional<DataPoint> satisfiable(const FeatureFormula& formula,
                                     const Schema& schema);

struct ConflictWitness {
  std::string rule_a;
  std::string rule_b;
  DataPoint point;
  ClassSet heads_a;
  ClassSet heads_b;
};

std::optional<ConflictWitness> conflict(const Rule& a, const Rule& b,
                                        const Scope& scope);

struct ConsistencyReport {
  bool consistent = true;
  std::vector<ConflictWitness> edges;
  /// Rules with a non-empty body extent and an empty head extent.
  std::vector<ConflictWitness> self_conflicts;
};

ConsistencyReport check_consistency(std::span<const Rule> rules,
                                    const Scope& scope);
bool is_consistent(std::span<const Rule> rules, const Scope& scope);

struct EnforcementReport {
  bool holds = true;
  std::optional<std::string> rule_id;
  std::optional<DataPoint> counterexample;
};

/// Every point covered by an enforced rule is covered by some enforcing
/// rule whose head extent is contained in the enforced rule's head extent.
EnforcementReport enforces(std::span<const Rule> enforcing,
                           std::span<const Rule> enforced, const Scope& scope);

struct CoherenceValue {
  bool vacuous = true;
  std::size_t numerator = 0;
  std::size_t denominator = 0;

  double ratio() const {
    return vacuous ? 1.0 : static_cast<double>(numerator) / denominator;
  }
  bool coherent() const { return vacuous || numerator == denominator; }
};

CoherenceValue tau_coherence(const Rule& rule, const ClassifierTable& table);

struct CompletenessReport {
  bool complete = true;
  std::vector<DataPoint> missing;
  std::vector<std::string> extras;
};

CompletenessReport check_complete(std::span<const Rule> rules,
                                  const ClassifierTable& table);

/// Number of points of the scope's universe covered by the formula (with
/// free-feature multipliers in Full scope).
std::uint64_t coverage(const FeatureFormula& formula, const Scope& scope);

}  // namespace xkb
