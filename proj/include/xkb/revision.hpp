#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "xkb/knowledge_base.hpp"
#include "xkb/semantics.hpp"

namespace xkb {

/// Pairwise conflict structure of a rule set. Vertex i is rules[i].
class ConflictGraph {
 public:
  ConflictGraph(std::span<const Rule> rules, const Scope& scope);

  std::size_t size() const { return vertices_.size(); }
  const std::vector<std::string>& vertices() const { return vertices_; }
  const std::vector<ConflictWitness>& edges() const { return edges_; }
  const std::vector<std::string>& self_loops() const { return self_loops_; }
  bool adjacent(std::size_t i, std::size_t j) const { return adj_[i][j]; }
  bool self_loop(std::size_t i) const { return loop_[i]; }
  std::size_t degree(std::size_t i) const;

 private:
  std::vector<std::string> vertices_;
  std::vector<ConflictWitness> edges_;
  std::vector<std::string> self_loops_;
  std::vector<std::vector<bool>> adj_;
  std::vector<bool> loop_;
};

enum class SelectionKind { kFullMeet, kMaxCardinality, kPriorityLexicographic };
enum class IncisionKind { kMinVertexCoverExact, kGreedyDegree };
enum class WeakeningStrategy { kBodyRestriction, kHeadExpansion, kRejectOnly };
enum class Scenario { kS1, kS2, kS3 };
enum class KdUpdate { kReplaceInstance, kForbid };
enum class CredibilityKind { kConsistentWithKd, kTauCoherent, kAlwaysCredible };

struct SelectionPolicy {
  SelectionKind kind = SelectionKind::kPriorityLexicographic;
};

struct IncisionPolicy {
  IncisionKind kind = IncisionKind::kMinVertexCoverExact;
};

struct CredibilityTest {
  CredibilityKind kind = CredibilityKind::kConsistentWithKd;
  double threshold = 1.0;
};

std::string_view to_string(SelectionKind kind);
std::string_view to_string(IncisionKind kind);
std::string_view to_string(WeakeningStrategy strategy);
std::string_view to_string(Scenario scenario);
std::string_view to_string(KdUpdate update);
std::optional<SelectionKind> selection_from_string(std::string_view text);
std::optional<IncisionKind> incision_from_string(std::string_view text);
std::optional<WeakeningStrategy> weakening_from_string(std::string_view text);
std::optional<Scenario> scenario_from_string(std::string_view text);
std::optional<KdUpdate> kd_update_from_string(std::string_view text);

/// Shared knobs of every operator.
struct RevisionSettings {
  explicit RevisionSettings(Scope scope,
                            std::shared_ptr<const ClassifierTable> table = nullptr);

  Scope scope;
  /// Used for τ in the priority order and for metrics; defaults to the
  /// dataset of a Dataset scope.
  std::shared_ptr<const ClassifierTable> table;
  /// Explicit ranking, most protected first. Unlisted rules follow in the
  /// default order: data origin, then higher τ, then id.
  std::vector<std::string> ranking;
  std::size_t remainder_cap = 10000;
  std::size_t exact_cover_limit = 24;
};

/// Indices of `rules`, most protected first.
std::vector<std::size_t> protection_order(std::span<const Rule> rules,
                                          const RevisionSettings& settings);

struct WeakenedPair {
  Rule before;
  Rule after;
};

struct RevisionTrace {
  std::string operator_name;
  Rule input;
  std::optional<Rule> effective_input;
  std::vector<std::string> removed;
  std::vector<WeakenedPair> weakened;
  bool accepted = false;
  /// 1 - coverage(effective input) / coverage(input) in the configured
  /// scope; 0 when the input is taken whole, 1 when it is rejected.
  double coverage_shrink = 0.0;
  std::vector<std::string> notes;
};

struct RevisionOutcome {
  ExplanationKB kb_after;
  RevisionTrace trace;
  std::vector<ConflictWitness> conflicts_found;
  KBMetrics metrics_after;
};

using RuleIdSet = std::vector<std::string>;

/// Maximal R ⊆ K with R ∪ {r} consistent, as sorted id sets in sorted order.
/// Throws LimitError past settings.remainder_cap.
std::vector<RuleIdSet> remainders(std::span<const Rule> k, const Rule& r,
                                  const RevisionSettings& settings);

/// Minimal K' ⊆ K with K' ∪ {r} inconsistent, as sorted id sets.
std::vector<RuleIdSet> kernels(std::span<const Rule> k, const Rule& r,
                               const Scope& scope);

/// BodyRestriction: body ∧ ¬(blocker bodies) ⇒ head. HeadExpansion: body ⇒
/// head ∨ (blocker heads). None when the result has an unsatisfiable body,
/// a head covering every class, still conflicts with a blocker, or the
/// strategy is RejectOnly. The returned rule keeps r's id.
std::optional<Rule> weaken(const Rule& r, std::span<const Rule> blockers,
                           WeakeningStrategy strategy, const Scope& scope);

/// K ∪ {r}.
RevisionOutcome expand(const ExplanationKB& kb, const Rule& r,
                       const RevisionSettings& settings);

RevisionOutcome partial_meet_revise(const ExplanationKB& kb, const Rule& r,
                                    SelectionPolicy policy,
                                    const RevisionSettings& settings);

RevisionOutcome kernel_revise(const ExplanationKB& kb, const Rule& r,
                              IncisionPolicy incision,
                              const RevisionSettings& settings);

RevisionOutcome consolidate(const ExplanationKB& kb, IncisionPolicy incision,
                            const RevisionSettings& settings);

RevisionOutcome screened_revise(const ExplanationKB& kb, const Rule& r,
                                const std::vector<std::string>& protected_ids,
                                SelectionPolicy inner,
                                const RevisionSettings& settings);

RevisionOutcome credibility_limited_revise(const ExplanationKB& kb,
                                           const Rule& r, CredibilityTest test,
                                           SelectionPolicy inner,
                                           const RevisionSettings& settings);

/// `protected_ids` defaults to every rule of K.
RevisionOutcome selective_revise(
    const ExplanationKB& kb, const Rule& r, WeakeningStrategy strategy,
    const std::optional<std::vector<std::string>>& protected_ids,
    SelectionPolicy inner, const RevisionSettings& settings);

struct ScenarioConfig {
  Scenario scenario = Scenario::kS1;
  /// Defaults: S1 none, S2 K_d, S3 all of K.
  std::optional<std::vector<std::string>> protected_ids;
  SelectionPolicy selection;
  IncisionPolicy incision;
  /// Defaults: BodyRestriction for S1 and S2, RejectOnly for S3.
  std::optional<WeakeningStrategy> weakening;
  KdUpdate kd_update = KdUpdate::kReplaceInstance;
};

RevisionOutcome scenario_revise(const ExplanationKB& kb, const Rule& r,
                                const ScenarioConfig& config,
                                const RevisionSettings& settings);

}  // namespace xkb
