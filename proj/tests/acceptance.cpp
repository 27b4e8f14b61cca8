// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <set>
#include <sstream>

#include "oracle.hpp"
#include "sample_fixture.hpp"
#include "xkb/error.hpp"
#include "xkb/generators.hpp"
#include "xkb/knowledge_base.hpp"
#include "xkb/parser.hpp"
#include "xkb/postulates.hpp"
#include "xkb/revision.hpp"

namespace {

using namespace xkb;
using xkb::testing::Sample;

// Pinned budgets.
constexpr double kGoldenSeconds = 1.0;
constexpr double kEquivalenceSeconds = 30.0;
constexpr double kOracleSeconds = 120.0;

constexpr std::size_t kEquivalenceInstances = 1000;
constexpr std::size_t kFullScopeInstances = 1000;
constexpr std::size_t kSetOracleInstances = 200;
constexpr std::size_t kDef3Instances = 500;
constexpr std::size_t kUniformityInstances = 200;
constexpr std::size_t kMatrixTrials = 500;
constexpr std::size_t kWeakeningCases = 1000;
constexpr std::size_t kParserDocuments = 1000;
constexpr std::size_t kNonWorseningKbs = 500;

struct Check {
  bool ok = true;
  std::ostringstream why;

  void expect(bool cond, const std::string& what) {
    if (!cond && ok) {
      ok = false;
      why << what;
    }
  }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::set<std::size_t> indices_of(const Sample& p, const std::vector<DataPoint>& pts) {
  std::set<std::size_t> out;
  for (const auto& x : pts)
    for (std::size_t i = 1; i < p.x.size(); ++i)
      if (p.x[i] == x) out.insert(i);
  return out;
}

std::set<std::string> conflicting_ids(const Rule& r, const std::vector<Rule>& k,
                                      const Scope& scope) {
  std::set<std::string> out;
  for (const auto& q : k)
    if (conflict(r, q, scope)) out.insert(q.id);
  return out;
}

FeatureFormula ff(const Schema& s, const std::string& text) {
  return parse_rule(s, text + " => " + s.classes()[0]).body;
}

// ---- 1 ----

bool golden(std::string& detail) {
  auto t0 = Clock::now();
  Check c;
  Sample p;
  const Scope d = p.dataset(), full = p.full();
  auto ext = [&](const std::string& f) { return indices_of(p, extent(ff(p.schema, f), d).points); };

  c.expect(ext("f1=1") == std::set<std::size_t>{1, 3, 4, 5}, "I_f(f1=1)");
  c.expect(ext("f3=0") == std::set<std::size_t>{1, 5, 6}, "I_f(f3=0)");
  c.expect(ext("f1=1 & f3=0") == std::set<std::size_t>{1, 5}, "I_f(f1=1 & f3=0)");
  c.expect(ext("f1=1 | f3=0") == std::set<std::size_t>{1, 3, 4, 5, 6}, "I_f(f1=1 | f3=0)");
  c.expect(ext("!f1=1") == std::set<std::size_t>{2, 6}, "I_f(!f1=1)");
  c.expect(class_extent(parse_rule(p.schema, "f1=1 => !c1").head, p.schema).names(p.schema) ==
               std::vector<std::string>{"c2", "c3"},
           "I_c(!c1)");
  for (std::size_t i = 1; i <= 6; ++i) {
    const Rule& r = p["r" + std::to_string(i)];
    c.expect(indices_of(p, extent(r.body, d).points) == std::set<std::size_t>{i},
             "I(r" + std::to_string(i) + ")");
  }
  c.expect(indices_of(p, extent(p["rx"].body, d).points) == std::set<std::size_t>{1, 4}, "I(rx)");
  c.expect(indices_of(p, extent(p["ry"].body, d).points) ==
               std::set<std::size_t>{1, 2, 3, 4, 6},
           "I(ry)");

  c.expect(enforces(p.set({"rx"}), p.set({"r1"}), d).holds, "{rx} enforces {r1}");
  auto e = enforces(p.set({"rx"}), p.set({"r1", "ry"}), d);
  c.expect(!e.holds && e.counterexample &&
               indices_of(p, {*e.counterexample}).size() == 1 &&
               std::set<std::size_t>{2, 3, 6}.count(*indices_of(p, {*e.counterexample}).begin()),
           "{rx} does not enforce {r1, ry}");
  c.expect(enforces(p.set({"r2", "r3", "r6", "rx"}), p.set({"r1", "ry"}), d).holds,
           "{r2, r3, r6, rx} enforces {r1, ry}");

  auto all8 = p.set({"r1", "r2", "r3", "r4", "r5", "r6", "rx", "ry"});
  c.expect(is_consistent(all8, d) && is_consistent(all8, full), "{r1..r6, rx, ry} consistent");
  c.expect(!is_consistent(p.set({"rz", "r3"}), d), "{rz, r3} inconsistent");
  c.expect(!is_consistent(p.set({"rz", "r5"}), d), "{rz, r5} inconsistent");

  for (const auto& r : all8)
    c.expect(tau_coherence(r, *p.table).coherent(), r.id + " coherent");
  auto tz = tau_coherence(p["rz"], *p.table);
  c.expect(!tz.coherent() && tz.numerator == 2 && tz.denominator == 4 && tz.ratio() == 0.5,
           "rz incoherent with tau 0.5");

  c.expect(conflicting_ids(p["rp"], all8, full) == std::set<std::string>{"ry"}, "rp conflicts");
  c.expect(conflicting_ids(p["rq"], all8, full) == std::set<std::string>{"r4", "rx"},
           "rq conflicts");
  c.expect(conflicting_ids(p["rr"], all8, full) == std::set<std::string>{"r1", "r4", "rx"},
           "rr conflicts");

  const double secs = seconds_since(t0);
  c.expect(secs < kGoldenSeconds, "took longer than the budget");
  detail = c.ok ? "extents, enforcement, consistency, coherence, feedback conflicts" : c.why.str();
  detail += " (" + std::to_string(secs).substr(0, 5) + " s)";
  return c.ok;
}

// ---- 2 and 3 ----

struct EquivalenceCase {
  Schema schema;
  std::shared_ptr<const ClassifierTable> table;
  std::vector<Rule> rules;
  std::vector<Rule> kd;
};

EquivalenceCase equivalence_case(InstanceGenerator& gen) {
  EquivalenceCase t;
  t.schema = gen.schema({2, 4, 3, 3});
  t.table = std::make_shared<const ClassifierTable>(gen.table(t.schema, 20));
  t.kd = derive_kd(*t.table);
  const bool coherent_by_construction = gen.coin();
  const std::size_t n = gen.uniform(1, 6);
  for (std::size_t i = 0; i < n; ++i) {
    Rule r = gen.rule(t.schema, "q" + std::to_string(i), Origin::kExplanation, 2);
    if (coherent_by_construction) {
      std::set<std::size_t> labels;
      for (const auto& row : t.table->rows())
        if (oracle::eval(t.schema, r.body, row.point)) labels.insert(row.label);
      if (!labels.empty()) {
        std::vector<ClassFormula> heads;
        for (auto l : labels) heads.push_back(class_is(t.schema.classes()[l]));
        r.head = ClassFormula::disj(std::move(heads));
      }
    }
    t.rules.push_back(std::move(r));
  }
  return t;
}

bool oracle_coherent(const EquivalenceCase& t) {
  for (const auto& r : t.rules) {
    auto v = oracle::tau(t.schema, r, *t.table);
    if (!v.vacuous && v.num != v.den) return false;
  }
  return true;
}

std::vector<Rule> joined(const EquivalenceCase& t) {
  auto all = t.rules;
  all.insert(all.end(), t.kd.begin(), t.kd.end());
  return all;
}

bool equivalence_dataset(std::string& detail) {
  auto t0 = Clock::now();
  InstanceGenerator gen(20260101);
  Check c;
  std::size_t coherent_count = 0;
  for (std::size_t i = 0; i < kEquivalenceInstances && c.ok; ++i) {
    auto t = equivalence_case(gen);
    c.expect(t.table->size() <= 20 && t.schema.feature_count() <= 4, "generator shape");
    bool coherent = true;
    for (const auto& r : t.rules) coherent &= tau_coherence(r, *t.table).coherent();
    const auto all = joined(t);
    const bool consistent = is_consistent(all, Scope::dataset(t.table));
    const auto d = oracle::universe(t.schema, t.table.get());
    c.expect(coherent == oracle_coherent(t), "coherence differs from oracle at instance " + std::to_string(i));
    c.expect(consistent == oracle::consistent(t.schema, all, d),
             "consistency differs from oracle at instance " + std::to_string(i));
    c.expect(coherent == consistent, "equivalence fails at instance " + std::to_string(i));
    coherent_count += coherent;
  }
  c.expect(coherent_count > 0 && coherent_count < kEquivalenceInstances, "instances not mixed");
  const double secs = seconds_since(t0);
  c.expect(secs < kEquivalenceSeconds, "took longer than the budget");
  std::ostringstream out;
  if (c.ok)
    out << kEquivalenceInstances << " instances, " << coherent_count << " coherent, "
        << kEquivalenceInstances - coherent_count << " incoherent";
  else
    out << c.why.str();
  out << " (" << secs << " s)";
  detail = out.str();
  return c.ok;
}

bool equivalence_full(std::string& detail) {
  Check c;
  Sample p;
  // Two coherent rules on a point outside D that disagree there.
  Rule a{"a", ff(p.schema, "f1=0 & f2=0 & f3=0"), class_is("c1"), Origin::kExplanation};
  Rule b{"b", ff(p.schema, "f1=0 & f2=0 & f3=0"), class_is("c2"), Origin::kExplanation};
  auto kb = p.set({"r1", "r2", "r3", "r4", "r5", "r6"});
  kb.push_back(a);
  kb.push_back(b);
  c.expect(tau_coherence(a, *p.table).coherent() && tau_coherence(b, *p.table).coherent(),
           "counterexample rules not coherent");
  c.expect(!is_consistent(kb, p.full()), "counterexample reported consistent");
  c.expect(!oracle::consistent(p.schema, kb, oracle::all_points(p.schema)),
           "oracle disagrees on counterexample");
  c.expect(is_consistent(kb, p.dataset()), "counterexample inconsistent on D");

  InstanceGenerator gen(20260202);
  std::size_t antecedent = 0, converse_fails = 0;
  for (std::size_t i = 0; i < kFullScopeInstances && c.ok; ++i) {
    auto t = equivalence_case(gen);
    const auto all = joined(t);
    const bool consistent = is_consistent(all, Scope::full_universe(t.schema));
    c.expect(consistent == oracle::consistent(t.schema, all, oracle::all_points(t.schema)),
             "consistency differs from oracle at instance " + std::to_string(i));
    bool coherent = true;
    for (const auto& r : t.rules) coherent &= tau_coherence(r, *t.table).coherent();
    if (consistent) {
      ++antecedent;
      c.expect(coherent, "consistent but incoherent at instance " + std::to_string(i));
    } else if (coherent) {
      ++converse_fails;
    }
  }
  c.expect(antecedent > 0, "no consistent instance generated");
  std::ostringstream out;
  if (c.ok)
    out << "counterexample detected; implication held on " << kFullScopeInstances
        << " instances (" << antecedent << " consistent, " << converse_fails
        << " coherent but inconsistent)";
  else
    out << c.why.str();
  detail = out.str();
  return c.ok;
}

// ---- 4 ----

// bad[i][j]: some point of the universe lies in both bodies with disjoint heads.
std::vector<std::vector<bool>> bad_pairs(const Schema& schema, const std::vector<Rule>& rules,
                                         const std::vector<DataPoint>& points) {
  const std::size_t n = rules.size();
  std::vector<std::vector<bool>> bad(n, std::vector<bool>(n, false));
  std::vector<std::vector<bool>> heads;
  for (const auto& r : rules) heads.push_back(oracle::classes(schema, r.head));
  for (const auto& x : points) {
    std::vector<std::size_t> cov;
    for (std::size_t i = 0; i < n; ++i)
      if (oracle::eval(schema, rules[i].body, x)) cov.push_back(i);
    for (auto i : cov)
      for (auto j : cov)
        if (oracle::disjoint(heads[i], heads[j])) bad[i][j] = true;
  }
  return bad;
}

// Subsets of K (bit i = rule i) that stay consistent when rule `extra` joins.
bool subset_consistent(const std::vector<std::vector<bool>>& bad, std::uint32_t mask,
                       std::size_t extra, std::size_t n) {
  for (std::size_t i = 0; i <= n; ++i) {
    if (i < n && !(mask >> i & 1)) continue;
    const std::size_t a = i < n ? i : extra;
    for (std::size_t j = i; j <= n; ++j) {
      if (j < n && !(mask >> j & 1)) continue;
      const std::size_t b = j < n ? j : extra;
      if (bad[a][b]) return false;
    }
  }
  return true;
}

std::vector<RuleIdSet> to_sets(const std::vector<std::uint32_t>& masks,
                               const std::vector<Rule>& k) {
  std::vector<RuleIdSet> out;
  for (auto m : masks) {
    RuleIdSet s;
    for (std::size_t i = 0; i < k.size(); ++i)
      if (m >> i & 1) s.push_back(k[i].id);
    std::sort(s.begin(), s.end());
    out.push_back(s);
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool oracle_equivalence(std::string& detail) {
  auto t0 = Clock::now();
  Check c;
  std::size_t nonempty_kernels = 0, multi_remainders = 0;

  GeneratorConfig config;
  for (std::size_t i = 0; i < kSetOracleInstances && c.ok; ++i) {
    config.dataset_scope = i % 2;
    auto inst = generate_instance(config, trial_seed(4040, i));
    const auto k = inst.kb.rules();
    c.expect(k.size() <= 10, "instance too large");
    const Scope scope = config.dataset_scope ? Scope::dataset(inst.table)
                                             : Scope::full_universe(inst.kb.schema());
    auto all = k;
    all.push_back(inst.input);
    const auto bad = bad_pairs(inst.kb.schema(), all,
                               oracle::universe(inst.kb.schema(),
                                                config.dataset_scope ? inst.table.get() : nullptr));
    const std::size_t n = k.size();
    std::vector<std::uint32_t> ok_masks, bad_masks;
    for (std::uint32_t m = 0; m < (1u << n); ++m)
      (subset_consistent(bad, m, n, n) ? ok_masks : bad_masks).push_back(m);
    std::vector<std::uint32_t> maximal, minimal;
    for (auto m : ok_masks) {
      bool is_max = true;
      for (auto o : ok_masks) is_max &= !(o != m && (o & m) == m);
      if (is_max) maximal.push_back(m);
    }
    for (auto m : bad_masks) {
      bool is_min = true;
      for (auto o : bad_masks) is_min &= !(o != m && (o & m) == o);
      if (is_min) minimal.push_back(m);
    }
    RevisionSettings settings(scope, inst.table);
    c.expect(remainders(k, inst.input, settings) == to_sets(maximal, k),
             "remainders differ at seed " + std::to_string(inst.seed));
    c.expect(kernels(k, inst.input, scope) == to_sets(minimal, k),
             "kernels differ at seed " + std::to_string(inst.seed));
    nonempty_kernels += !minimal.empty();
    multi_remainders += maximal.size() > 1;
  }

  InstanceGenerator gen(4141);
  for (std::size_t i = 0; i < kDef3Instances && c.ok; ++i) {
    Schema s = gen.schema({2, 6, 3, 4});
    c.expect(s.universe_size() <= 729, "universe too large");
    std::vector<Rule> rules;
    const std::size_t n = gen.uniform(1, 6);
    for (std::size_t j = 0; j < n; ++j)
      rules.push_back(gen.rule(s, "q" + std::to_string(j), Origin::kExplanation, 2));
    c.expect(is_consistent(rules, Scope::full_universe(s)) ==
                 oracle::consistent(s, rules, oracle::all_points(s)),
             "pairwise check differs from the definition at instance " + std::to_string(i));
  }

  std::size_t antecedent_holds = 0;
  GeneratorConfig ucfg;
  ucfg.max_rules = 9;
  for (std::size_t i = 0; i < kUniformityInstances && c.ok; ++i) {
    ucfg.dataset_scope = i % 2;
    auto inst = generate_instance(ucfg, trial_seed(4242, i));
    const auto k = inst.kb.rules();
    c.expect(k.size() <= 12, "instance too large");
    const Schema& s = inst.kb.schema();
    const Scope scope = ucfg.dataset_scope ? Scope::dataset(inst.table) : Scope::full_universe(s);
    auto all = k;
    all.push_back(inst.input);
    all.push_back(inst.paired);
    const auto bad =
        bad_pairs(s, all, oracle::universe(s, ucfg.dataset_scope ? inst.table.get() : nullptr));
    const std::size_t n = k.size();
    bool same = true;
    for (std::uint32_t m = 0; m < (1u << n) && same; ++m)
      same = subset_consistent(bad, m, n, n) == subset_consistent(bad, m, n + 1, n);
    c.expect(same_conflict_profile(k, inst.input, inst.paired, scope) == same,
             "uniformity antecedent differs at seed " + std::to_string(inst.seed));
    antecedent_holds += same;
  }
  c.expect(antecedent_holds > 0 && antecedent_holds < kUniformityInstances,
           "uniformity antecedent never varies");

  const double secs = seconds_since(t0);
  c.expect(secs < kOracleSeconds, "took longer than the budget");
  std::ostringstream out;
  if (c.ok)
    out << kSetOracleInstances << " remainder/kernel instances (" << nonempty_kernels
        << " with kernels, " << multi_remainders << " with several remainders), "
        << kDef3Instances << " pairwise vs definition, " << kUniformityInstances
        << " uniformity (" << antecedent_holds << " antecedent true)";
  else
    out << c.why.str();
  out << " (" << secs << " s)";
  detail = out.str();
  return c.ok;
}

// ---- 5 ----

bool matrix(std::string& detail) {
  Check c;
  struct Expect {
    const char* op;
    PostulateId id;
    bool violated;
  };
  const std::vector<Expect> expected = {
      {"s1", PostulateId::kSuccess, false},
      {"s1", PostulateId::kConsistencyPreservation, false},
      {"s1", PostulateId::kRelevance, false},
      {"s1", PostulateId::kUniformity, false},
      {"s3", PostulateId::kWeakSuccess, false},
      {"s3", PostulateId::kWeakProxySuccess, false},
      {"s3", PostulateId::kWeakInclusion, false},
      {"s3", PostulateId::kRelativeSuccess, false},
      {"s3", PostulateId::kSuccess, true},
      {"s2", PostulateId::kConsistencyPreservation, false},
      {"s2", PostulateId::kRelevance, false},
      {"s2", PostulateId::kUniformity, false},
      {"s2", PostulateId::kInclusionS2, false},
  };
  std::ostringstream summary;
  for (bool dataset : {false, true}) {
    GeneratorConfig config;
    config.trials = kMatrixTrials;
    config.seed = 1;
    config.dataset_scope = dataset;
    auto m = conformance_matrix({"s1", "s2", "s3"}, config);
    std::size_t s3_success_fails = 0;
    for (const auto& e : expected) {
      const auto& cell = m.cell(e.op, e.id);
      const std::string where = std::string(e.op) + "/" + std::string(to_string(e.id)) +
                                (dataset ? " dataset" : " full");
      c.expect(cell.errors == 0, where + ": " + std::to_string(cell.errors) + " errors");
      c.expect(cell.holds + cell.fails + cell.not_applicable + cell.errors == kMatrixTrials,
               where + ": trial count");
      if (e.violated) {
        c.expect(cell.fails >= 1, where + ": expected a violation, none witnessed");
        s3_success_fails = cell.fails;
      } else {
        c.expect(cell.fails == 0,
                 where + ": " + std::to_string(cell.fails) + " violations, replay seed " +
                     std::to_string(cell.first_violation_seed.value_or(0)) + ": " +
                     cell.first_witness.value_or(""));
      }
    }
    summary << (dataset ? ", dataset" : "full") << " scope S3 success violated "
            << s3_success_fails << "x";
  }
  detail = c.ok ? std::to_string(kMatrixTrials) + " trials per cell; " + summary.str()
                : c.why.str();
  return c.ok;
}

// ---- 6 ----

bool weakening(std::string& detail) {
  Check c;
  InstanceGenerator gen(6060);
  std::size_t produced = 0, vacuous = 0, none_for_conflict = 0;
  for (std::size_t i = 0; i < kWeakeningCases && c.ok; ++i) {
    Schema s = gen.schema({2, 4, 3, 3});
    const auto points = oracle::all_points(s);
    Rule r = gen.rule(s, "r", Origin::kFeedback, 2);
    std::vector<Rule> blockers;
    const std::size_t nb = gen.uniform(1, 4);
    for (std::size_t j = 0; j < nb; ++j) {
      Rule b = gen.rule(s, "b" + std::to_string(j), Origin::kExplanation, 2);
      if (gen.coin(0.15)) b.body = r.body | b.body;
      if (gen.coin(0.15)) b.head = !r.head;
      blockers.push_back(std::move(b));
    }
    for (auto strategy : {WeakeningStrategy::kBodyRestriction, WeakeningStrategy::kHeadExpansion}) {
      Rule manual = r;
      if (strategy == WeakeningStrategy::kBodyRestriction) {
        std::vector<FeatureFormula> bodies;
        for (const auto& b : blockers) bodies.push_back(b.body);
        manual.body = r.body & !FeatureFormula::disj(bodies);
      } else {
        std::vector<ClassFormula> heads{r.head};
        for (const auto& b : blockers) heads.push_back(b.head);
        manual.head = ClassFormula::disj(heads);
      }
      bool body_sat = false;
      for (const auto& x : points) body_sat |= oracle::eval(s, manual.body, x);
      const auto mh = oracle::classes(s, manual.head);
      const bool head_all = std::all_of(mh.begin(), mh.end(), [](bool b) { return b; });
      const bool is_vacuous = !body_sat || head_all;
      bool conflicts = false;
      for (const auto& b : blockers)
        conflicts |= !oracle::consistent(s, {manual, b}, points);

      auto out = weaken(r, blockers, strategy, Scope::full_universe(s));
      const std::string where = "case " + std::to_string(i) + " " + std::string(to_string(strategy));
      c.expect(out.has_value() == (!is_vacuous && !conflicts), where + ": null iff vacuous or conflicting");
      if (out) {
        ++produced;
        c.expect(oracle::enforces(s, {r}, {*out}, points), where + ": {r} does not enforce r'");
        for (const auto& b : blockers)
          c.expect(oracle::consistent(s, {*out, b}, points), where + ": r' conflicts with " + b.id);
        bool same = oracle::classes(s, out->head) == mh;
        for (const auto& x : points)
          same &= oracle::eval(s, out->body, x) == oracle::eval(s, manual.body, x);
        c.expect(same, where + ": r' differs from the construction");
      } else {
        vacuous += is_vacuous;
        none_for_conflict += !is_vacuous;
      }
    }
  }
  c.expect(produced > 0 && vacuous > 0, "cases not mixed");
  std::ostringstream out;
  if (c.ok)
    out << kWeakeningCases << " cases x 2 strategies: " << produced << " weakened, " << vacuous
        << " vacuous, " << none_for_conflict << " still conflicting";
  else
    out << c.why.str();
  detail = out.str();
  return c.ok;
}

// ---- 7 ----

bool parser(std::string& detail) {
  Check c;
  InstanceGenerator gen(7070);
  for (std::size_t i = 0; i < kParserDocuments && c.ok; ++i) {
    Document doc = gen.document({1, 4, 3, 4}, gen.uniform(0, 8));
    const std::string text = render(doc);
    Document back = parse_document(text);
    bool same = back.schema == doc.schema && back.rules.size() == doc.rules.size();
    for (std::size_t k = 0; same && k < doc.rules.size(); ++k)
      same = back.rules[k].id == doc.rules[k].id && back.rules[k].origin == doc.rules[k].origin &&
             rule_key(back.rules[k]) == rule_key(doc.rules[k]);
    c.expect(same, "document " + std::to_string(i) + " changed on round trip");
    c.expect(render(parse_document(render(back))) == render(back),
             "document " + std::to_string(i) + " render not stable");
  }
  Sample p;
  const std::string schema_text = render(p.schema);
  std::size_t rules = 0;
  for (const auto& [id, r] : p.rules) {
    const std::string once = render(r);
    const Document d = parse_document(schema_text + "\n" + once + "\n");
    c.expect(d.rules.size() == 1 && render(d.rules[0]) == once && same_rule(d.rules[0], r),
             "rule " + id + " not bit-stable");
    ++rules;
  }
  c.expect(render(parse_document(xkb::testing::kSampleKb)) == xkb::testing::kSampleKb,
           "sample document not bit-stable");
  detail = c.ok ? std::to_string(kParserDocuments) + " random documents, " +
                      std::to_string(rules) + " supplementary rules bit-stable"
                : c.why.str();
  return c.ok;
}

// ---- 8 ----

std::size_t oracle_edges(const Schema& s, const std::vector<Rule>& rules, const Scope& scope) {
  const auto bad = bad_pairs(
      s, rules, oracle::universe(s, scope.is_dataset() ? &scope.table() : nullptr));
  std::size_t n = 0;
  for (std::size_t i = 0; i < rules.size(); ++i)
    for (std::size_t j = i; j < rules.size(); ++j) n += bad[i][j];
  return n;
}

bool non_worsening(std::string& detail) {
  Check c;
  GeneratorConfig config;
  std::size_t inconsistent = 0, checked = 0;
  for (std::size_t i = 0; i < kNonWorseningKbs && c.ok; ++i) {
    config.dataset_scope = i % 2;
    auto inst = generate_instance(config, trial_seed(8080, i));
    const Schema& s = inst.kb.schema();
    const Scope scope = config.dataset_scope ? Scope::dataset(inst.table) : Scope::full_universe(s);
    RevisionSettings settings(scope, inst.table);
    const std::size_t before = oracle_edges(s, inst.kb.rules(), scope);
    inconsistent += before > 0;
    std::vector<std::pair<std::string, RevisionOutcome>> outcomes;
    outcomes.emplace_back("consolidate", consolidate(inst.kb, {}, settings));
    for (auto sc : {Scenario::kS1, Scenario::kS2, Scenario::kS3}) {
      ScenarioConfig cfg;
      cfg.scenario = sc;
      try {
        outcomes.emplace_back(std::string(to_string(sc)),
                              scenario_revise(inst.kb, inst.input, cfg, settings));
      } catch (const ValidationError&) {
        // self-conflicting input: refused, K untouched
      }
    }
    for (const auto& [name, out] : outcomes) {
      const std::size_t after = oracle_edges(s, out.kb_after.rules(), scope);
      ++checked;
      c.expect(after <= before, name + " raised conflicts from " + std::to_string(before) +
                                    " to " + std::to_string(after) + " at seed " +
                                    std::to_string(inst.seed));
      c.expect(out.metrics_after.conflict_edge_count == after,
               name + " reports a different edge count at seed " + std::to_string(inst.seed));
    }
  }
  c.expect(inconsistent > 0, "no inconsistent KB generated");
  std::ostringstream out;
  if (c.ok)
    out << kNonWorseningKbs << " KBs (" << inconsistent << " inconsistent), " << checked
        << " revisions";
  else
    out << c.why.str();
  detail = out.str();
  return c.ok;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<bool(std::string&)>>> criteria = {
      {"golden suite", golden},
      {"coherence iff consistency with K_d (dataset scope)", equivalence_dataset},
      {"full-universe counterexample and one-way implication", equivalence_full},
      {"oracle equivalence", oracle_equivalence},
      {"conformance matrix", matrix},
      {"weakening soundness", weakening},
      {"parser round trip", parser},
      {"non-worsening", non_worsening},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    std::string detail;
    bool ok = false;
    try {
      ok = criteria[i].second(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    std::printf("criterion %zu: %s  %s: %s\n", i + 1, ok ? "PASS" : "FAIL", criteria[i].first,
                detail.c_str());
    std::fflush(stdout);
    failed += !ok;
  }
  return failed ? 1 : 0;
}
