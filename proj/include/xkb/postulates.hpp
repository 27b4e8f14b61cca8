#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "xkb/generators.hpp"
#include "xkb/revision.hpp"

namespace xkb {

enum class PostulateId {
  kSuccess,
  kRelativeSuccess,
  kWeakSuccess,
  kProxySuccess,
  kWeakProxySuccess,
  kInclusion,
  kWeakInclusion,
  kInclusionS1,
  kInclusionS2,
  kInclusionS3,
  kConsistency,
  kConsistencyPreservation,
  kRelevance,
  kCoreRetainment,
  kUniformity,
  kNonWorsening,
};

const std::vector<PostulateId>& all_postulates();
std::string_view to_string(PostulateId id);
std::optional<PostulateId> postulate_from_string(std::string_view text);

enum class VerdictStatus { kHolds, kFails, kNotApplicable };
std::string_view to_string(VerdictStatus status);

struct Verdict {
  VerdictStatus status = VerdictStatus::kHolds;
  /// Always set when the postulate fails; a short reason otherwise.
  std::optional<std::string> witness;

  bool holds() const { return status == VerdictStatus::kHolds; }
  bool fails() const { return status == VerdictStatus::kFails; }
};

/// Re-runs the operator that produced an outcome. Needed by the proxy
/// postulates (replay on r′) and by uniformity when no paired outcome is given.
using Reviser = std::function<RevisionOutcome(const ExplanationKB&, const Rule&)>;

struct PostulateCase {
  ExplanationKB kb;
  Rule input;
  RevisionOutcome outcome;
  /// Second input r″ for uniformity, optionally with its outcome.
  std::optional<Rule> paired;
  std::optional<RevisionOutcome> paired_outcome;
};

Verdict check_postulate(PostulateId id, const PostulateCase& c, const Scope& scope,
                        const Reviser& replay = {});

using PostulateReport = std::map<PostulateId, Verdict>;

PostulateReport check_postulates(const PostulateCase& c, const Scope& scope,
                                 const Reviser& replay = {},
                                 std::span<const PostulateId> ids = all_postulates());

/// Fast uniformity antecedent: both inputs self-inconsistent, or both
/// self-consistent with the same conflicts among the self-consistent rules of K.
bool same_conflict_profile(std::span<const Rule> k, const Rule& a, const Rule& b,
                           const Scope& scope);

// ---- brute-force oracle ----

enum class OracleMode { kRemainders, kKernels, kDef3, kUniformityAntecedent };
std::string_view to_string(OracleMode mode);
std::optional<OracleMode> oracle_mode_from_string(std::string_view text);

struct OracleLimits {
  std::size_t max_rules = 12;
  std::size_t max_points = 729;
};

struct OracleResult {
  /// Remainders or kernels as sorted id sets.
  std::vector<RuleIdSet> sets;
  /// Def3: the rule set is consistent. Uniformity: the antecedent holds.
  bool holds = false;
  std::optional<DataPoint> witness_point;
  std::vector<std::string> witness_rules;
};

/// Exhaustive evaluation over every subset of `k` and every point of the
/// scope's universe. `r` is required for remainders, kernels and uniformity,
/// `r2` for uniformity. Def3 checks `k` itself.
OracleResult brute_oracle(OracleMode mode, std::span<const Rule> k, const Rule* r,
                          const Rule* r2, const Scope& scope,
                          const OracleLimits& limits = {});

// ---- conformance matrix ----

/// Operators by name: expansion, partial-meet, kernel, screened (K_d
/// protected), credibility (consistent with K_d), selective, s1, s2, s3.
const std::vector<std::string>& operator_names();
Reviser make_reviser(const std::string& name, const RevisionSettings& settings);

struct GeneratorConfig {
  SchemaShape shape{2, 4, 3, 3};
  std::size_t max_rules = 6;
  std::size_t max_rows = 10;
  std::size_t trials = 500;
  std::uint64_t seed = 1;
  bool dataset_scope = false;
  /// Only keep instances where K ∪ {r} is consistent.
  bool consistent_inputs_only = false;
};

struct MatrixInstance {
  std::uint64_t seed = 0;
  std::shared_ptr<const ClassifierTable> table;
  ExplanationKB kb;
  Rule input;
  Rule paired;
};

/// Seed of trial i; generate_instance(config, trial_seed(config.seed, i))
/// replays the trial.
std::uint64_t trial_seed(std::uint64_t seed, std::size_t trial);
MatrixInstance generate_instance(const GeneratorConfig& config, std::uint64_t seed);

struct MatrixCell {
  std::size_t holds = 0;
  std::size_t fails = 0;
  std::size_t not_applicable = 0;
  std::size_t errors = 0;
  std::optional<std::uint64_t> first_violation_seed;
  std::optional<std::string> first_witness;

  /// "always-held", "violated" or "never-applicable".
  std::string summary() const;
};

struct ConformanceMatrix {
  std::vector<std::string> operators;
  std::vector<PostulateId> postulates;
  GeneratorConfig config;
  /// cells[operator][postulate]
  std::vector<std::vector<MatrixCell>> cells;

  const MatrixCell& cell(const std::string& op, PostulateId id) const;
};

ConformanceMatrix conformance_matrix(const std::vector<std::string>& operators,
                                     const GeneratorConfig& config);

std::string matrix_to_json(const ConformanceMatrix& m);
/// Operators as rows, postulates as columns; ✓ for always-held, ✗n for n
/// violations, - when never applicable.
std::string render_matrix(const ConformanceMatrix& m);

}  // namespace xkb
