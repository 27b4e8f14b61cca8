#include "xkb/postulates.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "json.hpp"

#include "xkb/error.hpp"

namespace xkb {

namespace {

using Keys = std::set<std::string>;

Keys keys_of(std::span<const Rule> rules) {
  Keys out;
  for (const auto& r : rules) out.insert(rule_key(r));
  return out;
}

std::vector<Rule> with(std::vector<Rule> rules, const Rule& r) {
  rules.push_back(r);
  return rules;
}

std::vector<Rule> without_keys(const std::vector<Rule>& rules, const Keys& drop) {
  std::vector<Rule> out;
  for (const auto& q : rules)
    if (!drop.count(rule_key(q))) out.push_back(q);
  return out;
}

Verdict holds(std::string why = {}) {
  return {VerdictStatus::kHolds, why.empty() ? std::nullopt : std::optional(why)};
}
Verdict fails(std::string why) { return {VerdictStatus::kFails, std::move(why)}; }
Verdict not_applicable(std::string why) {
  return {VerdictStatus::kNotApplicable, std::move(why)};
}

Verdict enforcement(std::span<const Rule> a, std::span<const Rule> b, const Scope& scope,
                    const std::string& what) {
  auto report = enforces(a, b, scope);
  if (report.holds) return holds();
  std::string why = what + " fails";
  if (report.rule_id) why += " for rule " + *report.rule_id;
  if (report.counterexample) why += " at " + render(scope.schema(), *report.counterexample);
  return fails(why);
}

Verdict consistency(std::span<const Rule> rules, const Scope& scope) {
  auto report = check_consistency(rules, scope);
  if (report.consistent) return holds();
  const auto& w = report.self_conflicts.empty() ? report.edges.front()
                                                : report.self_conflicts.front();
  return fails("conflict between " + w.rule_a + " and " + w.rule_b + " at " +
               render(scope.schema(), w.point));
}

std::size_t edge_count(std::span<const Rule> rules, const Scope& scope) {
  auto report = check_consistency(rules, scope);
  return report.edges.size() + report.self_conflicts.size();
}

bool self_consistent(const Rule& r, const Scope& scope) {
  return is_consistent(std::span<const Rule>(&r, 1), scope);
}

// Rules of K that are not canonically present in the result.
std::vector<Rule> removed_rules(const std::vector<Rule>& k, const std::vector<Rule>& result) {
  const Keys present = keys_of(result);
  std::vector<Rule> out;
  for (const auto& q : k)
    if (!present.count(rule_key(q))) out.push_back(q);
  return out;
}

Keys k_part(const std::vector<Rule>& k, const std::vector<Rule>& result) {
  const Keys in_k = keys_of(k);
  Keys out;
  for (const auto& q : result)
    if (in_k.count(rule_key(q))) out.insert(rule_key(q));
  return out;
}

Verdict proxy(const PostulateCase& c, const Scope& scope, const Reviser& replay,
              bool require_input_enforces) {
  const auto& eff = c.outcome.trace.effective_input;
  if (!eff) return fails("outcome records no effective input");
  const auto result = c.outcome.kb_after.rules();
  if (require_input_enforces) {
    auto v = enforcement(std::vector<Rule>{c.input}, std::vector<Rule>{*eff}, scope,
                         "{r} enforces {r'}");
    if (v.fails()) return v;
  }
  auto v = enforcement(result, std::vector<Rule>{*eff}, scope, "result enforces {r'}");
  if (v.fails()) return v;
  if (!replay) throw Error("proxy success needs a replay operator");
  if (keys_of(replay(c.kb, *eff).kb_after.rules()) != keys_of(result))
    return fails("revising by r' = " + render(*eff) + " gives a different result");
  return holds();
}

Verdict relevance(const PostulateCase& c, const Scope& scope, bool core_only) {
  const auto k = c.kb.rules();
  const auto k_r = with(k, c.input);
  const auto result = c.outcome.kb_after.rules();
  if (!core_only) {
    auto v = enforcement(k_r, result, scope, "K ∪ {r} enforces result");
    if (v.fails()) return v;
    v = consistency(result, scope);
    if (v.fails()) return v;
  }
  for (const auto& gone : removed_rules(k, result)) {
    if (!self_consistent(gone, scope)) continue;
    bool found = false;
    for (const auto& q : k_r) {
      if (!self_consistent(q, scope) || !conflict(q, gone, scope)) continue;
      if (core_only || is_consistent(with(result, q), scope)) {
        found = true;
        break;
      }
    }
    if (!found) return fails("removed rule " + gone.id + " has no justifying conflict");
  }
  return holds();
}

Verdict uniformity(const PostulateCase& c, const Scope& scope, const Reviser& replay) {
  if (!c.paired) return not_applicable("no paired input");
  const auto k = c.kb.rules();
  if (!same_conflict_profile(k, c.input, *c.paired, scope))
    return not_applicable("inputs conflict with K differently");
  RevisionOutcome second;
  if (c.paired_outcome) {
    second = *c.paired_outcome;
  } else {
    if (!replay) throw Error("uniformity needs a paired outcome or a replay operator");
    second = replay(c.kb, *c.paired);
  }
  const Keys a = k_part(k, c.outcome.kb_after.rules());
  const Keys b = k_part(k, second.kb_after.rules());
  if (a == b) return holds();
  std::vector<std::string> diff;
  std::set_symmetric_difference(a.begin(), a.end(), b.begin(), b.end(),
                                std::back_inserter(diff));
  return fails("K ∩ result differs on " + diff.front());
}

}  // namespace

const std::vector<PostulateId>& all_postulates() {
  static const std::vector<PostulateId> all = {
      PostulateId::kSuccess,          PostulateId::kRelativeSuccess,
      PostulateId::kWeakSuccess,      PostulateId::kProxySuccess,
      PostulateId::kWeakProxySuccess, PostulateId::kInclusion,
      PostulateId::kWeakInclusion,    PostulateId::kInclusionS1,
      PostulateId::kInclusionS2,      PostulateId::kInclusionS3,
      PostulateId::kConsistency,      PostulateId::kConsistencyPreservation,
      PostulateId::kRelevance,        PostulateId::kCoreRetainment,
      PostulateId::kUniformity,       PostulateId::kNonWorsening};
  return all;
}

std::string_view to_string(PostulateId id) {
  switch (id) {
    case PostulateId::kSuccess: return "success";
    case PostulateId::kRelativeSuccess: return "relative-success";
    case PostulateId::kWeakSuccess: return "weak-success";
    case PostulateId::kProxySuccess: return "proxy-success";
    case PostulateId::kWeakProxySuccess: return "weak-proxy-success";
    case PostulateId::kInclusion: return "inclusion";
    case PostulateId::kWeakInclusion: return "weak-inclusion";
    case PostulateId::kInclusionS1: return "inclusion-s1";
    case PostulateId::kInclusionS2: return "inclusion-s2";
    case PostulateId::kInclusionS3: return "inclusion-s3";
    case PostulateId::kConsistency: return "consistency";
    case PostulateId::kConsistencyPreservation: return "consistency-preservation";
    case PostulateId::kRelevance: return "relevance";
    case PostulateId::kCoreRetainment: return "core-retainment";
    case PostulateId::kUniformity: return "uniformity";
    case PostulateId::kNonWorsening: return "non-worsening";
  }
  return "";
}

std::optional<PostulateId> postulate_from_string(std::string_view text) {
  for (auto id : all_postulates())
    if (to_string(id) == text) return id;
  return std::nullopt;
}

std::string_view to_string(VerdictStatus status) {
  switch (status) {
    case VerdictStatus::kHolds: return "holds";
    case VerdictStatus::kFails: return "fails";
    case VerdictStatus::kNotApplicable: return "not-applicable";
  }
  return "";
}

bool same_conflict_profile(std::span<const Rule> k, const Rule& a, const Rule& b,
                           const Scope& scope) {
  const bool sa = self_consistent(a, scope), sb = self_consistent(b, scope);
  if (!sa || !sb) return !sa && !sb;
  for (const auto& q : k) {
    if (!self_consistent(q, scope)) continue;
    if (conflict(q, a, scope).has_value() != conflict(q, b, scope).has_value())
      return false;
  }
  return true;
}

Verdict check_postulate(PostulateId id, const PostulateCase& c, const Scope& scope,
                        const Reviser& replay) {
  const auto k = c.kb.rules();
  const auto result = c.outcome.kb_after.rules();
  const std::vector<Rule> input{c.input};
  const bool input_in_result = keys_of(result).count(rule_key(c.input)) > 0;
  switch (id) {
    case PostulateId::kSuccess:
      return enforcement(result, input, scope, "result enforces {r}");
    case PostulateId::kRelativeSuccess:
      if (input_in_result) return holds("input accepted");
      if (keys_of(result) == keys_of(k)) return holds("input rejected, K unchanged");
      return fails("input not in result and result differs from K");
    case PostulateId::kWeakSuccess:
      if (!is_consistent(with(k, c.input), scope))
        return not_applicable("K ∪ {r} is inconsistent");
      return enforcement(result, input, scope, "result enforces {r}");
    case PostulateId::kProxySuccess:
      return proxy(c, scope, replay, true);
    case PostulateId::kWeakProxySuccess:
      return proxy(c, scope, replay, false);
    case PostulateId::kInclusion:
    case PostulateId::kWeakInclusion: {
      if (id == PostulateId::kWeakInclusion && !input_in_result)
        return not_applicable("input not in result");
      const Keys allowed = keys_of(with(k, c.input));
      for (const auto& q : result)
        if (!allowed.count(rule_key(q))) return fails("rule " + q.id + " is not in K ∪ {r}");
      return holds();
    }
    case PostulateId::kInclusionS1:
      return enforcement(k, without_keys(result, {rule_key(c.input)}), scope,
                         "K enforces result ∖ {r}");
    case PostulateId::kInclusionS2:
      return enforcement(with(k, c.input), result, scope, "K ∪ {r} enforces result");
    case PostulateId::kInclusionS3:
      return enforcement(input, without_keys(result, keys_of(k)), scope,
                         "{r} enforces result ∖ K");
    case PostulateId::kConsistency:
      return consistency(result, scope);
    case PostulateId::kConsistencyPreservation:
      if (!is_consistent(k, scope)) return not_applicable("K is inconsistent");
      return consistency(result, scope);
    case PostulateId::kRelevance:
      return relevance(c, scope, false);
    case PostulateId::kCoreRetainment:
      return relevance(c, scope, true);
    case PostulateId::kUniformity:
      return uniformity(c, scope, replay);
    case PostulateId::kNonWorsening: {
      const auto before = edge_count(k, scope), after = edge_count(result, scope);
      if (after <= before) return holds();
      return fails("conflict count rose from " + std::to_string(before) + " to " +
                   std::to_string(after));
    }
  }
  throw Error("unknown postulate");
}

PostulateReport check_postulates(const PostulateCase& c, const Scope& scope,
                                 const Reviser& replay, std::span<const PostulateId> ids) {
  PostulateReport out;
  for (auto id : ids) out.emplace(id, check_postulate(id, c, scope, replay));
  return out;
}

// ---- brute-force oracle ----

std::string_view to_string(OracleMode mode) {
  switch (mode) {
    case OracleMode::kRemainders: return "remainders";
    case OracleMode::kKernels: return "kernels";
    case OracleMode::kDef3: return "def3";
    case OracleMode::kUniformityAntecedent: return "uniformity";
  }
  return "";
}

std::optional<OracleMode> oracle_mode_from_string(std::string_view text) {
  for (auto m : {OracleMode::kRemainders, OracleMode::kKernels, OracleMode::kDef3,
                 OracleMode::kUniformityAntecedent})
    if (to_string(m) == text) return m;
  return std::nullopt;
}

namespace {

std::vector<DataPoint> universe_points(const Scope& scope, std::size_t limit) {
  const Schema& s = scope.schema();
  if (scope.is_dataset()) {
    std::vector<DataPoint> out;
    for (const auto& row : scope.table().rows()) out.push_back(row.point);
    if (out.size() > limit)
      throw LimitError("oracle limited to " + std::to_string(limit) + " points", out.size());
    return out;
  }
  std::size_t total = 1;
  for (std::size_t f = 0; f < s.feature_count(); ++f) {
    total *= s.domain_size(f);
    if (total > limit)
      throw LimitError("oracle limited to " + std::to_string(limit) + " points", total);
  }
  std::vector<DataPoint> out;
  DataPoint x;
  x.values.assign(s.feature_count(), 0);
  for (std::size_t n = 0; n < total; ++n) {
    out.push_back(x);
    for (std::size_t f = s.feature_count(); f-- > 0;) {
      if (++x.values[f] < s.domain_size(f)) break;
      x.values[f] = 0;
    }
  }
  return out;
}

// Rules indexed 0..n-1. For every point, the pairs (i, j), i ≤ j, whose
// bodies both cover it while their heads are disjoint.
struct PointTable {
  PointTable(const std::vector<Rule>& rules, const Scope& scope, std::size_t max_points)
      : rules(rules), points(universe_points(scope, max_points)) {
    const Schema& s = scope.schema();
    std::vector<ClassSet> heads;
    for (const auto& r : rules) heads.push_back(class_extent(r.head, s));
    for (std::size_t p = 0; p < points.size(); ++p) {
      std::vector<std::size_t> covering;
      for (std::size_t i = 0; i < rules.size(); ++i)
        if (eval(s, rules[i].body, points[p])) covering.push_back(i);
      for (auto i : covering)
        for (auto j : covering)
          if (i <= j && !heads[i].intersects(heads[j]))
            bad.push_back({(std::uint64_t{1} << i) | (std::uint64_t{1} << j), p, i, j});
    }
  }

  struct Bad {
    std::uint64_t mask;
    std::size_t point;
    std::size_t a, b;
  };

  const Bad* violation(std::uint64_t subset) const {
    for (const auto& b : bad)
      if ((b.mask & subset) == b.mask) return &b;
    return nullptr;
  }

  std::vector<Rule> rules;
  std::vector<DataPoint> points;
  std::vector<Bad> bad;
};

std::vector<RuleIdSet> ids_of_masks(const std::vector<Rule>& k,
                                    const std::vector<std::uint64_t>& masks) {
  std::vector<RuleIdSet> out;
  for (auto m : masks) {
    RuleIdSet ids;
    for (std::size_t i = 0; i < k.size(); ++i)
      if (m >> i & 1) ids.push_back(k[i].id);
    std::sort(ids.begin(), ids.end());
    out.push_back(std::move(ids));
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

OracleResult brute_oracle(OracleMode mode, std::span<const Rule> k, const Rule* r,
                          const Rule* r2, const Scope& scope, const OracleLimits& limits) {
  if (k.size() > limits.max_rules)
    throw LimitError("oracle limited to " + std::to_string(limits.max_rules) + " rules",
                     k.size());
  if (mode != OracleMode::kDef3 && !r) throw ValidationError("oracle mode needs an input rule");
  if (mode == OracleMode::kUniformityAntecedent && !r2)
    throw ValidationError("uniformity oracle needs two input rules");
  OracleResult out;
  std::vector<Rule> rules(k.begin(), k.end());
  const std::size_t n = rules.size();
  const std::uint64_t all = (std::uint64_t{1} << n) - 1;

  if (mode == OracleMode::kDef3) {
    PointTable t(rules, scope, limits.max_points);
    const auto* v = t.violation(all);
    out.holds = v == nullptr;
    if (v) {
      out.witness_point = t.points[v->point];
      out.witness_rules = {rules[v->a].id, rules[v->b].id};
    }
    return out;
  }

  if (mode == OracleMode::kUniformityAntecedent) {
    rules.push_back(*r);
    rules.push_back(*r2);
    PointTable t(rules, scope, limits.max_points);
    const std::uint64_t bit_a = std::uint64_t{1} << n, bit_b = std::uint64_t{1} << (n + 1);
    out.holds = true;
    for (std::uint64_t m = 0; m <= all; ++m) {
      const bool ia = t.violation(m | bit_a) != nullptr;
      const bool ib = t.violation(m | bit_b) != nullptr;
      if (ia != ib) {
        out.holds = false;
        out.witness_rules = ids_of_masks(rules, {m}).front();
        break;
      }
    }
    return out;
  }

  rules.push_back(*r);
  PointTable t(rules, scope, limits.max_points);
  const std::uint64_t bit_r = std::uint64_t{1} << n;
  std::vector<std::uint64_t> good, bad;
  for (std::uint64_t m = 0; m <= all; ++m)
    (t.violation(m | bit_r) ? bad : good).push_back(m);
  std::vector<std::uint64_t> chosen;
  if (mode == OracleMode::kRemainders) {
    for (auto m : good)
      if (std::none_of(good.begin(), good.end(),
                       [&](std::uint64_t x) { return x != m && (m & ~x) == 0; }))
        chosen.push_back(m);
  } else {
    for (auto m : bad)
      if (std::none_of(bad.begin(), bad.end(),
                       [&](std::uint64_t x) { return x != m && (x & ~m) == 0; }))
        chosen.push_back(m);
  }
  rules.pop_back();
  out.sets = ids_of_masks(rules, chosen);
  out.holds = true;
  return out;
}

// ---- conformance matrix ----

const std::vector<std::string>& operator_names() {
  static const std::vector<std::string> names = {
      "expansion", "partial-meet", "kernel", "screened", "credibility",
      "selective", "s1",           "s2",     "s3"};
  return names;
}

Reviser make_reviser(const std::string& name, const RevisionSettings& settings) {
  auto kd_ids = [](const ExplanationKB& kb) {
    std::vector<std::string> out;
    for (const auto& q : kb.kd()) out.push_back(q.id);
    return out;
  };
  if (name == "expansion")
    return [settings](const ExplanationKB& kb, const Rule& r) { return expand(kb, r, settings); };
  if (name == "partial-meet")
    return [settings](const ExplanationKB& kb, const Rule& r) {
      return partial_meet_revise(kb, r, {}, settings);
    };
  if (name == "kernel")
    return [settings](const ExplanationKB& kb, const Rule& r) {
      return kernel_revise(kb, r, {}, settings);
    };
  if (name == "screened")
    return [settings, kd_ids](const ExplanationKB& kb, const Rule& r) {
      return screened_revise(kb, r, kd_ids(kb), {}, settings);
    };
  if (name == "credibility")
    return [settings](const ExplanationKB& kb, const Rule& r) {
      return credibility_limited_revise(kb, r, {}, {}, settings);
    };
  if (name == "selective")
    return [settings](const ExplanationKB& kb, const Rule& r) {
      return selective_revise(kb, r, WeakeningStrategy::kBodyRestriction, std::nullopt, {},
                              settings);
    };
  if (auto scenario = scenario_from_string(name))
    return [settings, s = *scenario](const ExplanationKB& kb, const Rule& r) {
      ScenarioConfig config;
      config.scenario = s;
      return scenario_revise(kb, r, config, settings);
    };
  throw ValidationError("unknown operator " + name);
}

std::uint64_t trial_seed(std::uint64_t seed, std::size_t trial) {
  // splitmix64 finaliser keeps neighbouring trials uncorrelated.
  std::uint64_t z = seed * 0x9E3779B97F4A7C15ull + trial + 1;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

namespace {

Rule paired_input(InstanceGenerator& gen, const Schema& s, const Rule& r) {
  Rule out = r;
  out.id = r.id + "_pair";
  switch (gen.uniform(0, 4)) {
    case 0:
      out.body = !(!r.body);
      break;
    case 1: {
      const auto& f = s.features()[gen.uniform(0, s.feature_count() - 1)];
      out.body = r.body & (r.body | feature_eq(f.name, f.domain[gen.uniform(0, f.domain.size() - 1)]));
      break;
    }
    case 2:
      out.head = r.head | r.head;
      break;
    case 3: {
      const auto& f = s.features()[gen.uniform(0, s.feature_count() - 1)];
      out.body = r.body & feature_eq(f.name, f.domain[gen.uniform(0, f.domain.size() - 1)]);
      break;
    }
    default:
      out = gen.rule(s, r.id + "_pair", Origin::kFeedback, 2);
  }
  return out;
}

}  // namespace

MatrixInstance generate_instance(const GeneratorConfig& config, std::uint64_t seed) {
  InstanceGenerator gen(seed);
  MatrixInstance inst;
  inst.seed = seed;
  for (int attempt = 0;; ++attempt) {
    const Schema s = gen.schema(config.shape);
    inst.table = std::make_shared<const ClassifierTable>(gen.table(s, config.max_rows));
    auto kd = derive_kd(*inst.table);
    kd.resize(std::min(kd.size(), gen.uniform(0, std::min<std::size_t>(3, config.max_rules))));
    std::vector<Rule> ke;
    const std::size_t n = gen.uniform(kd.size() < config.max_rules ? 1 : 0,
                                      config.max_rules - kd.size());
    for (std::size_t i = 0; i < n; ++i) {
      Rule q = gen.rule(s, "q" + std::to_string(i), Origin::kExplanation, 2);
      if (gen.coin(0.05) && s.class_count() > 1)
        q.head = class_is(s.classes()[0]) & class_is(s.classes()[1]);
      ke.push_back(std::move(q));
    }
    inst.kb = ExplanationKB(s, kd, ke);
    if (gen.coin(0.2) && !inst.table->empty()) {
      const auto& row = inst.table->rows()[gen.uniform(0, inst.table->size() - 1)];
      std::size_t label = gen.uniform(0, s.class_count() - 1);
      if (gen.coin(0.5)) label = row.label;
      inst.input = gen.instance_rule(s, row.point, label, "in", Origin::kFeedback);
    } else {
      inst.input = gen.rule(s, "in", Origin::kFeedback, 2);
    }
    inst.paired = paired_input(gen, s, inst.input);
    const Scope scope = config.dataset_scope ? Scope::dataset(inst.table)
                                             : Scope::full_universe(s);
    if (config.consistent_inputs_only &&
        !is_consistent(with(inst.kb.rules(), inst.input), scope) && attempt < 1000)
      continue;
    return inst;
  }
}

std::string MatrixCell::summary() const {
  if (fails > 0) return "violated";
  if (holds == 0) return "never-applicable";
  return "always-held";
}

const MatrixCell& ConformanceMatrix::cell(const std::string& op, PostulateId id) const {
  const auto oi = std::find(operators.begin(), operators.end(), op) - operators.begin();
  const auto pi = std::find(postulates.begin(), postulates.end(), id) - postulates.begin();
  if (oi == static_cast<long>(operators.size()) || pi == static_cast<long>(postulates.size()))
    throw ValidationError("no matrix cell for " + op + "/" + std::string(to_string(id)));
  return cells[oi][pi];
}

ConformanceMatrix conformance_matrix(const std::vector<std::string>& operators,
                                     const GeneratorConfig& config) {
  ConformanceMatrix m;
  m.operators = operators;
  m.postulates = all_postulates();
  m.config = config;
  m.cells.assign(operators.size(), std::vector<MatrixCell>(m.postulates.size()));
  for (const auto& op : operators)
    if (std::find(operator_names().begin(), operator_names().end(), op) ==
        operator_names().end())
      throw ValidationError("unknown operator " + op);
  for (std::size_t trial = 0; trial < config.trials; ++trial) {
    const std::uint64_t seed = trial_seed(config.seed, trial);
    const MatrixInstance inst = generate_instance(config, seed);
    const Scope scope = config.dataset_scope ? Scope::dataset(inst.table)
                                             : Scope::full_universe(inst.kb.schema());
    const RevisionSettings settings(scope, inst.table);
    for (std::size_t o = 0; o < operators.size(); ++o) {
      const Reviser reviser = make_reviser(operators[o], settings);
      auto& row = m.cells[o];
      try {
        PostulateCase c{inst.kb, inst.input, reviser(inst.kb, inst.input), inst.paired,
                        std::nullopt};
        c.paired_outcome = reviser(inst.kb, inst.paired);
        for (std::size_t p = 0; p < m.postulates.size(); ++p) {
          const Verdict v = check_postulate(m.postulates[p], c, scope, reviser);
          auto& cell = row[p];
          switch (v.status) {
            case VerdictStatus::kHolds: ++cell.holds; break;
            case VerdictStatus::kNotApplicable: ++cell.not_applicable; break;
            case VerdictStatus::kFails:
              if (cell.fails++ == 0) {
                cell.first_violation_seed = seed;
                cell.first_witness = v.witness;
              }
              break;
          }
        }
      } catch (const Error&) {
        for (auto& cell : row) ++cell.errors;
      }
    }
  }
  return m;
}

std::string matrix_to_json(const ConformanceMatrix& m) {
  using nlohmann::json;
  json j;
  j["trials"] = m.config.trials;
  j["seed"] = m.config.seed;
  j["scope"] = m.config.dataset_scope ? "dataset" : "full";
  j["operators"] = m.operators;
  std::vector<std::string> names;
  for (auto id : m.postulates) names.emplace_back(to_string(id));
  j["postulates"] = names;
  json cells = json::object();
  for (std::size_t o = 0; o < m.operators.size(); ++o) {
    json row = json::object();
    for (std::size_t p = 0; p < m.postulates.size(); ++p) {
      const auto& c = m.cells[o][p];
      json cell = {{"status", c.summary()},
                   {"holds", c.holds},
                   {"fails", c.fails},
                   {"not_applicable", c.not_applicable},
                   {"errors", c.errors}};
      if (c.first_violation_seed) {
        cell["first_violation_seed"] = *c.first_violation_seed;
        cell["first_witness"] = c.first_witness.value_or("");
      }
      row[names[p]] = cell;
    }
    cells[m.operators[o]] = row;
  }
  j["cells"] = cells;
  return j.dump(2);
}

std::string render_matrix(const ConformanceMatrix& m) {
  std::vector<std::string> header = {"operator"};
  for (auto id : m.postulates) header.emplace_back(to_string(id));
  std::vector<std::vector<std::string>> rows = {header};
  for (std::size_t o = 0; o < m.operators.size(); ++o) {
    std::vector<std::string> row = {m.operators[o]};
    for (const auto& c : m.cells[o]) {
      if (c.fails > 0) {
        row.push_back("✗" + std::to_string(c.fails));
      } else if (c.holds == 0) {
        row.push_back("-");
      } else {
        row.push_back("✓");
      }
    }
    rows.push_back(row);
  }
  // Display width: the check marks are one column but three bytes.
  auto width = [](const std::string& s) {
    std::size_t w = 0;
    for (unsigned char ch : s) w += (ch & 0xC0) != 0x80;
    return w;
  };
  std::vector<std::size_t> widths(header.size(), 0);
  for (const auto& row : rows)
    for (std::size_t i = 0; i < row.size(); ++i) widths[i] = std::max(widths[i], width(row[i]));
  std::ostringstream out;
  for (const auto& row : rows) {
    std::string line;
    for (std::size_t i = 0; i < row.size(); ++i)
      line += row[i] + std::string(widths[i] - width(row[i]) + 2, ' ');
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out << line << "\n";
  }
  return out.str();
}

}  // namespace xkb
