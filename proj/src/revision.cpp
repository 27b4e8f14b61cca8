#include "xkb/revision.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <set>

#include "xkb/error.hpp"

namespace xkb {

namespace {

bool is_vacuous(const Rule& r, const Schema& schema) {
  return !satisfiable(r.body, schema).has_value();
}

bool self_conflicting(const Rule& r, const Scope& scope) {
  return !is_consistent(std::span<const Rule>(&r, 1), scope);
}

std::vector<std::string> sorted_ids(const std::vector<Rule>& rules,
                                    const std::vector<std::size_t>& idx) {
  std::vector<std::string> out;
  for (auto i : idx) out.push_back(rules[i].id);
  std::sort(out.begin(), out.end());
  return out;
}

// Everything an operator needs to know about K and the input.
struct Analysis {
  Analysis(const std::vector<Rule>& k, const Rule* r,
           const RevisionSettings& settings)
      : rules(k), graph(rules, settings.scope) {
    rank.resize(rules.size());
    auto order = protection_order(rules, settings);
    for (std::size_t pos = 0; pos < order.size(); ++pos) rank[order[pos]] = pos;
    hits_r.assign(rules.size(), false);
    if (!r) return;
    for (std::size_t i = 0; i < rules.size(); ++i) {
      if (auto w = conflict(rules[i], *r, settings.scope)) {
        hits_r[i] = true;
        witnesses.push_back(std::move(*w));
      }
    }
  }

  std::size_t size() const { return rules.size(); }

  std::vector<Rule> rules;
  ConflictGraph graph;
  std::vector<std::size_t> rank;
  std::vector<bool> hits_r;
  std::vector<ConflictWitness> witnesses;
};

// ---- vertex covers ----

struct CoverProblem {
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  std::vector<bool> hard;
  std::vector<std::size_t> rank;
  std::vector<std::uint64_t> cost;
};

struct CoverKey {
  std::size_t hard = 0;
  std::size_t size = 0;
  std::uint64_t cost = 0;
  std::vector<std::size_t> ranks;  // ascending
};

// Fewer protected rules, then fewer rules, then less lost coverage, then the
// cover whose most protected member is least protected.
bool better(const CoverKey& a, const CoverKey& b) {
  if (a.hard != b.hard) return a.hard < b.hard;
  if (a.size != b.size) return a.size < b.size;
  if (a.cost != b.cost) return a.cost < b.cost;
  for (std::size_t i = 0; i < a.ranks.size(); ++i)
    if (a.ranks[i] != b.ranks[i]) return a.ranks[i] > b.ranks[i];
  return false;
}

CoverKey key_of(const CoverProblem& p, const std::vector<std::size_t>& cover) {
  CoverKey k;
  k.size = cover.size();
  for (auto v : cover) {
    k.hard += p.hard[v];
    k.cost += p.cost[v];
    k.ranks.push_back(p.rank[v]);
  }
  std::sort(k.ranks.begin(), k.ranks.end());
  return k;
}

std::vector<std::size_t> exact_cover(const CoverProblem& p, std::size_t limit) {
  std::set<std::size_t> touched;
  for (auto [u, v] : p.edges) {
    touched.insert(u);
    touched.insert(v);
  }
  if (touched.size() > limit)
    throw LimitError("exact vertex cover limited to " + std::to_string(limit) +
                         " conflicting rules, got " + std::to_string(touched.size()),
                     touched.size());
  const std::size_t n = p.hard.size();
  std::vector<std::vector<std::size_t>> nbrs(n);
  for (auto [u, v] : p.edges) {
    nbrs[u].push_back(v);
    nbrs[v].push_back(u);
  }
  enum State : char { kFree, kIn, kOut };
  std::vector<char> state(n, kFree);
  std::vector<std::size_t> chosen;
  std::optional<CoverKey> best_key;
  std::vector<std::size_t> best;
  std::size_t hard_in = 0;

  std::function<void()> search = [&]() {
    if (best_key && (hard_in > best_key->hard ||
                     (hard_in == best_key->hard && chosen.size() > best_key->size)))
      return;
    const std::pair<std::size_t, std::size_t>* open = nullptr;
    for (const auto& e : p.edges) {
      if (state[e.first] != kIn && state[e.second] != kIn) {
        open = &e;
        break;
      }
    }
    if (!open) {
      auto k = key_of(p, chosen);
      if (!best_key || better(k, *best_key)) {
        best_key = k;
        best = chosen;
      }
      return;
    }
    std::size_t u = open->first;
    if (state[u] == kOut) u = open->second;
    if (state[u] == kOut) return;
    // Branch 1: u in the cover.
    state[u] = kIn;
    chosen.push_back(u);
    hard_in += p.hard[u];
    search();
    hard_in -= p.hard[u];
    chosen.pop_back();
    // Branch 2: u out, so every neighbour is in.
    state[u] = kOut;
    std::vector<std::size_t> added;
    bool feasible = true;
    for (auto w : nbrs[u]) {
      if (state[w] == kIn) continue;
      if (state[w] == kOut) {
        feasible = false;
        break;
      }
      state[w] = kIn;
      chosen.push_back(w);
      hard_in += p.hard[w];
      added.push_back(w);
    }
    if (feasible) search();
    for (auto w : added) {
      state[w] = kFree;
      chosen.pop_back();
      hard_in -= p.hard[w];
    }
    state[u] = kFree;
  };
  search();
  std::sort(best.begin(), best.end());
  return best;
}

std::vector<std::size_t> greedy_cover(const CoverProblem& p) {
  const std::size_t n = p.hard.size();
  std::vector<bool> in(n, false);
  auto uncovered = [&](const std::pair<std::size_t, std::size_t>& e) {
    return !in[e.first] && !in[e.second];
  };
  while (true) {
    std::vector<std::size_t> deg(n, 0);
    bool any = false;
    for (const auto& e : p.edges) {
      if (!uncovered(e)) continue;
      any = true;
      ++deg[e.first];
      ++deg[e.second];
    }
    if (!any) break;
    std::size_t pick = n;
    for (std::size_t v = 0; v < n; ++v) {
      if (deg[v] == 0) continue;
      if (pick == n) {
        pick = v;
        continue;
      }
      auto key = [&](std::size_t x) {
        return std::make_tuple(!p.hard[x], deg[x], p.rank[x]);
      };
      if (key(v) > key(pick)) pick = v;
    }
    in[pick] = true;
  }
  std::vector<std::size_t> cover;
  for (std::size_t v = 0; v < n; ++v)
    if (in[v]) cover.push_back(v);
  // Prune to a minimal cover, trying the most protected members first.
  std::sort(cover.begin(), cover.end(), [&](std::size_t a, std::size_t b) {
    if (p.hard[a] != p.hard[b]) return p.hard[a] > p.hard[b];
    return p.rank[a] < p.rank[b];
  });
  for (auto v : cover) {
    in[v] = false;
    bool ok = true;
    for (const auto& e : p.edges)
      if (uncovered(e)) ok = false;
    if (!ok) in[v] = true;
  }
  std::vector<std::size_t> out;
  for (std::size_t v = 0; v < n; ++v)
    if (in[v]) out.push_back(v);
  return out;
}

// Cover of the internal conflict edges among `eligible` vertices of K.
std::vector<std::size_t> internal_cover(const Analysis& a,
                                        const std::vector<bool>& eligible,
                                        const std::vector<bool>& hard,
                                        const std::vector<std::uint64_t>& cost,
                                        IncisionPolicy incision,
                                        const RevisionSettings& settings) {
  CoverProblem p;
  p.hard = hard;
  p.rank = a.rank;
  p.cost = cost;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = i + 1; j < a.size(); ++j)
      if (eligible[i] && eligible[j] && a.graph.adjacent(i, j)) p.edges.push_back({i, j});
  if (p.edges.empty()) return {};
  return incision.kind == IncisionKind::kGreedyDegree
             ? greedy_cover(p)
             : exact_cover(p, settings.exact_cover_limit);
}

// ---- maximal independent sets ----

void enumerate_mis(const Analysis& a, const std::vector<std::size_t>& candidates,
                   std::size_t cap,
                   const std::function<void(const std::vector<std::size_t>&)>& emit) {
  std::vector<std::size_t> always, branching;
  for (auto v : candidates) {
    bool isolated = true;
    for (auto w : candidates)
      if (w != v && a.graph.adjacent(v, w)) isolated = false;
    (isolated ? always : branching).push_back(v);
  }
  std::size_t count = 0;
  std::vector<std::size_t> current = always;
  auto non_neighbours = [&](std::size_t v, const std::vector<std::size_t>& set) {
    std::vector<std::size_t> out;
    for (auto w : set)
      if (w != v && !a.graph.adjacent(v, w)) out.push_back(w);
    return out;
  };
  std::function<void(std::vector<std::size_t>, std::vector<std::size_t>)> bk =
      [&](std::vector<std::size_t> pset, std::vector<std::size_t> xset) {
        if (pset.empty() && xset.empty()) {
          if (++count > cap)
            throw LimitError("more than " + std::to_string(cap) + " remainders", cap);
          emit(current);
          return;
        }
        std::size_t pivot = pset.empty() ? xset.front() : pset.front();
        std::size_t best = 0;
        for (const auto* s : {&pset, &xset}) {
          for (auto u : *s) {
            auto nn = non_neighbours(u, pset).size();
            if (nn > best) {
              best = nn;
              pivot = u;
            }
          }
        }
        std::vector<std::size_t> todo;
        for (auto v : pset)
          if (v == pivot || a.graph.adjacent(v, pivot)) todo.push_back(v);
        for (auto v : todo) {
          current.push_back(v);
          bk(non_neighbours(v, pset), non_neighbours(v, xset));
          current.pop_back();
          pset.erase(std::find(pset.begin(), pset.end(), v));
          xset.push_back(v);
        }
      };
  bk(branching, {});
}

// Candidates for remainders: rules that conflict neither with the input nor
// with themselves nor with an always-kept protected rule.
std::vector<std::size_t> remainder_candidates(const Analysis& a,
                                              const std::vector<bool>& prot) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (prot[i] || a.hits_r[i] || a.graph.self_loop(i)) continue;
    bool blocked = false;
    for (std::size_t j = 0; j < a.size(); ++j)
      if (prot[j] && !a.graph.self_loop(j) && a.graph.adjacent(i, j)) blocked = true;
    if (!blocked) out.push_back(i);
  }
  return out;
}

std::vector<bool> partial_meet_keep(const Analysis& a, const std::vector<bool>& prot,
                                    SelectionPolicy policy,
                                    const RevisionSettings& settings) {
  std::vector<bool> keep = prot;
  auto candidates = remainder_candidates(a, prot);
  if (policy.kind == SelectionKind::kPriorityLexicographic) {
    std::sort(candidates.begin(), candidates.end(),
              [&](std::size_t x, std::size_t y) { return a.rank[x] < a.rank[y]; });
    std::vector<std::size_t> chosen;
    for (auto v : candidates) {
      bool ok = true;
      for (auto w : chosen)
        if (a.graph.adjacent(v, w)) ok = false;
      if (ok) chosen.push_back(v);
    }
    for (auto v : chosen) keep[v] = true;
    return keep;
  }
  std::vector<std::vector<std::size_t>> all;
  enumerate_mis(a, candidates, settings.remainder_cap,
                [&](const std::vector<std::size_t>& s) { all.push_back(s); });
  std::size_t max_size = 0;
  for (const auto& s : all) max_size = std::max(max_size, s.size());
  std::vector<std::size_t> hits(a.size(), 0);
  std::size_t selected = 0;
  for (const auto& s : all) {
    if (policy.kind == SelectionKind::kMaxCardinality && s.size() != max_size) continue;
    ++selected;
    for (auto v : s) ++hits[v];
  }
  for (std::size_t i = 0; i < a.size(); ++i)
    if (selected > 0 && hits[i] == selected) keep[i] = true;
  return keep;
}

// ---- building results ----

class ResultBuilder {
 public:
  explicit ResultBuilder(const ExplanationKB& kb)
      : schema_(kb.schema()), kd_(kb.kd()), ke_(kb.ke()) {
    for (const auto& r : kb.rules()) used_.insert(r.id);
  }

  void remove(const std::string& id) {
    auto drop = [&](std::vector<Rule>& v) {
      v.erase(std::remove_if(v.begin(), v.end(),
                             [&](const Rule& q) { return q.id == id; }),
              v.end());
    };
    drop(kd_);
    drop(ke_);
  }

  bool contains(const Rule& r) const {
    for (const auto* part : {&kd_, &ke_})
      for (const auto& q : *part)
        if (same_rule(q, r)) return true;
    return false;
  }

  std::string fresh_id(const std::string& base, const char* sep) {
    for (int n = 1;; ++n) {
      std::string id = base + sep + std::to_string(n);
      if (!used_.count(id)) return id;
    }
  }

  // Adds r unless an identical rule is present. Returns the rule as stored.
  // Vacuous rules carry no information and are never stored.
  std::optional<Rule> add(Rule r, const std::string* kd_slot = nullptr) {
    if (contains(r) || !satisfiable(r.body, schema_)) return std::nullopt;
    if (used_.count(r.id)) r.id = fresh_id(r.id, "_");
    used_.insert(r.id);
    if (is_instance_rule(schema_, r)) {
      r.origin = Origin::kData;
      auto pos = kd_.end();
      if (kd_slot)
        pos = std::find_if(kd_.begin(), kd_.end(),
                           [&](const Rule& q) { return q.id == *kd_slot; });
      if (pos != kd_.end()) {
        *pos = r;
      } else {
        kd_.push_back(r);
      }
    } else {
      if (r.origin == Origin::kData) r.origin = Origin::kDerived;
      ke_.push_back(r);
    }
    return r;
  }

  std::vector<Rule> rules() const {
    std::vector<Rule> out = kd_;
    out.insert(out.end(), ke_.begin(), ke_.end());
    return out;
  }

  ExplanationKB build() const { return ExplanationKB(schema_, kd_, ke_); }

 private:
  Schema schema_;
  std::vector<Rule> kd_;
  std::vector<Rule> ke_;
  std::set<std::string> used_;
};

std::vector<Rule> conflicting_in(const std::vector<Rule>& rules, const Rule& q,
                                 const Scope& scope) {
  std::vector<Rule> out;
  for (const auto& x : rules)
    if (x.id != q.id && conflict(x, q, scope)) out.push_back(x);
  return out;
}

// Removes `cut` from the builder, then re-adds each cut rule weakened against
// whatever it conflicts with in the current result, or drops it.
void cut_and_weaken(const Analysis& a, const std::vector<std::size_t>& cut,
                    WeakeningStrategy strategy, const RevisionSettings& settings,
                    ResultBuilder& builder, RevisionTrace& trace) {
  for (auto i : cut) builder.remove(a.rules[i].id);
  std::vector<std::size_t> ordered = cut;
  std::sort(ordered.begin(), ordered.end());
  for (auto i : ordered) {
    const Rule& q = a.rules[i];
    if (strategy == WeakeningStrategy::kRejectOnly || a.graph.self_loop(i)) continue;
    const auto blockers = conflicting_in(builder.rules(), q, settings.scope);
    auto weakened = weaken(q, blockers, strategy, settings.scope);
    if (!weakened) continue;
    weakened->id = builder.fresh_id(q.id, "_w");
    weakened->origin = Origin::kDerived;
    if (auto stored = builder.add(*weakened))
      trace.weakened.push_back({q, *stored});
  }
}

Rule rejected_input(const Rule& r) {
  return Rule{r.id + "_rejected", FeatureFormula::bottom(), r.head, Origin::kDerived};
}

RevisionOutcome finish(const ExplanationKB& kb, const ResultBuilder& builder,
                       RevisionTrace trace, std::vector<ConflictWitness> conflicts,
                       const RevisionSettings& settings) {
  RevisionOutcome out;
  out.kb_after = builder.build();
  for (const auto& r : kb.rules())
    if (!out.kb_after.find(r.id)) trace.removed.push_back(r.id);
  const Scope& scope = settings.scope;
  const std::uint64_t base = coverage(trace.input.body, scope);
  if (base == 0) {
    trace.coverage_shrink = 0.0;
  } else if (!trace.accepted || !trace.effective_input) {
    trace.coverage_shrink = 1.0;
  } else {
    trace.coverage_shrink =
        1.0 - static_cast<double>(coverage(trace.effective_input->body, scope)) / base;
  }
  out.trace = std::move(trace);
  out.conflicts_found = std::move(conflicts);
  const ClassifierTable empty(kb.schema(), {});
  out.metrics_after =
      metrics(out.kb_after, settings.table ? *settings.table : empty, scope);
  return out;
}

RevisionOutcome unchanged(const ExplanationKB& kb, RevisionTrace trace,
                          std::vector<ConflictWitness> conflicts,
                          const RevisionSettings& settings) {
  trace.accepted = false;
  return finish(kb, ResultBuilder(kb), std::move(trace), std::move(conflicts), settings);
}

RevisionTrace start_trace(const char* name, const Rule& r) {
  RevisionTrace t;
  t.operator_name = name;
  t.input = r;
  return t;
}

void require_schema(const ExplanationKB& kb, const RevisionSettings& settings) {
  if (!(kb.schema() == settings.scope.schema()))
    throw ValidationError("knowledge base and scope use different schemas");
}

// Self-conflicting inputs are refused outright.
void check_input(const ExplanationKB& kb, const Rule& r, RevisionTrace& trace,
                 const RevisionSettings& settings) {
  require_schema(kb, settings);
  check_symbols(kb.schema(), r);
  if (is_vacuous(r, kb.schema()))
    trace.notes.push_back("input body is unsatisfiable; it is not stored");
  if (self_conflicting(r, settings.scope))
    throw ValidationError("input rule " + r.id + " has an empty head extent");
}

std::vector<bool> mask_of(const Analysis& a, const std::vector<std::string>& ids) {
  std::set<std::string> wanted(ids.begin(), ids.end());
  std::vector<bool> out(a.size(), false);
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = wanted.count(a.rules[i].id) > 0;
  return out;
}

RevisionOutcome keep_and_add(const ExplanationKB& kb, const Analysis& a,
                             const std::vector<bool>& keep, const Rule& input,
                             RevisionTrace trace, const RevisionSettings& settings) {
  ResultBuilder builder(kb);
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!keep[i]) builder.remove(a.rules[i].id);
  auto stored = builder.add(input);
  trace.effective_input = stored ? *stored : input;
  trace.accepted = true;
  return finish(kb, builder, std::move(trace), a.witnesses, settings);
}

std::vector<std::uint64_t> zero_cost(const Analysis& a) {
  return std::vector<std::uint64_t>(a.size(), 0);
}

}  // namespace

// ---- public API ----

ConflictGraph::ConflictGraph(std::span<const Rule> rules, const Scope& scope) {
  const std::size_t n = rules.size();
  adj_.assign(n, std::vector<bool>(n, false));
  loop_.assign(n, false);
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < n; ++i) {
    vertices_.push_back(rules[i].id);
    index.emplace(rules[i].id, i);
  }
  auto report = check_consistency(rules, scope);
  for (const auto& w : report.self_conflicts) {
    self_loops_.push_back(w.rule_a);
    loop_[index.at(w.rule_a)] = true;
  }
  for (const auto& e : report.edges) {
    const auto i = index.at(e.rule_a), j = index.at(e.rule_b);
    adj_[i][j] = adj_[j][i] = true;
  }
  edges_ = std::move(report.edges);
}

std::size_t ConflictGraph::degree(std::size_t i) const {
  return static_cast<std::size_t>(std::count(adj_[i].begin(), adj_[i].end(), true));
}

std::string_view to_string(SelectionKind kind) {
  switch (kind) {
    case SelectionKind::kFullMeet: return "full-meet";
    case SelectionKind::kMaxCardinality: return "max-cardinality";
    case SelectionKind::kPriorityLexicographic: return "priority";
  }
  return "";
}

std::string_view to_string(IncisionKind kind) {
  return kind == IncisionKind::kGreedyDegree ? "greedy" : "exact";
}

std::string_view to_string(WeakeningStrategy strategy) {
  switch (strategy) {
    case WeakeningStrategy::kBodyRestriction: return "body-restriction";
    case WeakeningStrategy::kHeadExpansion: return "head-expansion";
    case WeakeningStrategy::kRejectOnly: return "reject-only";
  }
  return "";
}

std::string_view to_string(Scenario scenario) {
  switch (scenario) {
    case Scenario::kS1: return "s1";
    case Scenario::kS2: return "s2";
    case Scenario::kS3: return "s3";
  }
  return "";
}

std::string_view to_string(KdUpdate update) {
  return update == KdUpdate::kForbid ? "forbid" : "replace-instance";
}

namespace {
template <class E, std::size_t N>
std::optional<E> lookup(std::string_view text, const E (&values)[N]) {
  for (E v : values)
    if (to_string(v) == text) return v;
  return std::nullopt;
}
}  // namespace

std::optional<SelectionKind> selection_from_string(std::string_view text) {
  const SelectionKind all[] = {SelectionKind::kFullMeet, SelectionKind::kMaxCardinality,
                               SelectionKind::kPriorityLexicographic};
  return lookup(text, all);
}

std::optional<IncisionKind> incision_from_string(std::string_view text) {
  const IncisionKind all[] = {IncisionKind::kMinVertexCoverExact,
                              IncisionKind::kGreedyDegree};
  return lookup(text, all);
}

std::optional<WeakeningStrategy> weakening_from_string(std::string_view text) {
  const WeakeningStrategy all[] = {WeakeningStrategy::kBodyRestriction,
                                   WeakeningStrategy::kHeadExpansion,
                                   WeakeningStrategy::kRejectOnly};
  return lookup(text, all);
}

std::optional<Scenario> scenario_from_string(std::string_view text) {
  const Scenario all[] = {Scenario::kS1, Scenario::kS2, Scenario::kS3};
  return lookup(text, all);
}

std::optional<KdUpdate> kd_update_from_string(std::string_view text) {
  const KdUpdate all[] = {KdUpdate::kReplaceInstance, KdUpdate::kForbid};
  return lookup(text, all);
}

RevisionSettings::RevisionSettings(Scope s, std::shared_ptr<const ClassifierTable> t)
    : scope(std::move(s)), table(std::move(t)) {
  if (!table && scope.is_dataset()) table = scope.table_ptr();
}

std::vector<std::size_t> protection_order(std::span<const Rule> rules,
                                          const RevisionSettings& settings) {
  std::map<std::string, std::size_t> explicit_rank;
  for (std::size_t i = 0; i < settings.ranking.size(); ++i)
    explicit_rank.emplace(settings.ranking[i], i);
  std::vector<double> tau(rules.size(), 1.0);
  if (settings.table)
    for (std::size_t i = 0; i < rules.size(); ++i)
      tau[i] = tau_coherence(rules[i], *settings.table).ratio();
  std::vector<std::size_t> order(rules.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  auto key = [&](std::size_t i) {
    auto it = explicit_rank.find(rules[i].id);
    return std::make_tuple(it == explicit_rank.end() ? settings.ranking.size() : it->second,
                           rules[i].origin == Origin::kData ? 0 : 1, -tau[i],
                           std::string_view(rules[i].id));
  };
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return key(a) < key(b); });
  return order;
}

std::vector<RuleIdSet> remainders(std::span<const Rule> k, const Rule& r,
                                  const RevisionSettings& settings) {
  std::vector<Rule> rules(k.begin(), k.end());
  if (self_conflicting(r, settings.scope)) return {};
  Analysis a(rules, &r, settings);
  std::vector<RuleIdSet> out;
  enumerate_mis(a, remainder_candidates(a, std::vector<bool>(a.size(), false)),
                settings.remainder_cap, [&](const std::vector<std::size_t>& s) {
                  out.push_back(sorted_ids(a.rules, s));
                });
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<RuleIdSet> kernels(std::span<const Rule> k, const Rule& r,
                               const Scope& scope) {
  if (self_conflicting(r, scope)) return {RuleIdSet{}};
  std::vector<Rule> rules(k.begin(), k.end());
  ConflictGraph g(rules, scope);
  std::vector<bool> single(rules.size(), false);
  std::vector<RuleIdSet> out;
  for (std::size_t i = 0; i < rules.size(); ++i) {
    single[i] = g.self_loop(i) || conflict(rules[i], r, scope).has_value();
    if (single[i]) out.push_back({rules[i].id});
  }
  for (std::size_t i = 0; i < rules.size(); ++i)
    for (std::size_t j = i + 1; j < rules.size(); ++j)
      if (!single[i] && !single[j] && g.adjacent(i, j))
        out.push_back(sorted_ids(rules, {i, j}));
  std::sort(out.begin(), out.end());
  return out;
}

std::optional<Rule> weaken(const Rule& r, std::span<const Rule> blockers,
                           WeakeningStrategy strategy, const Scope& scope) {
  if (strategy == WeakeningStrategy::kRejectOnly) return std::nullopt;
  const Schema& schema = scope.schema();
  Rule out = r;
  if (!blockers.empty()) {
    if (strategy == WeakeningStrategy::kBodyRestriction) {
      std::vector<FeatureFormula> bodies;
      for (const auto& b : blockers) bodies.push_back(b.body);
      out.body = r.body & !FeatureFormula::disj(std::move(bodies));
    } else {
      std::vector<ClassFormula> heads{r.head};
      for (const auto& b : blockers) heads.push_back(b.head);
      out.head = ClassFormula::disj(std::move(heads));
    }
    out.origin = Origin::kDerived;
  }
  if (!satisfiable(out.body, schema)) return std::nullopt;
  if (class_extent(out.head, schema).full()) return std::nullopt;
  for (const auto& b : blockers)
    if (conflict(out, b, scope)) return std::nullopt;
  return out;
}

RevisionOutcome expand(const ExplanationKB& kb, const Rule& r,
                       const RevisionSettings& settings) {
  require_schema(kb, settings);
  check_symbols(kb.schema(), r);
  RevisionTrace trace = start_trace("expansion", r);
  ResultBuilder builder(kb);
  auto stored = builder.add(r);
  trace.effective_input = stored ? *stored : r;
  trace.accepted = true;
  return finish(kb, builder, trace, {}, settings);
}

RevisionOutcome partial_meet_revise(const ExplanationKB& kb, const Rule& r,
                                    SelectionPolicy policy,
                                    const RevisionSettings& settings) {
  RevisionTrace trace = start_trace("partial-meet", r);
  check_input(kb, r, trace, settings);
  Analysis a(kb.rules(), &r, settings);
  auto keep = partial_meet_keep(a, std::vector<bool>(a.size(), false), policy, settings);
  return keep_and_add(kb, a, keep, r, trace, settings);
}

RevisionOutcome kernel_revise(const ExplanationKB& kb, const Rule& r,
                              IncisionPolicy incision,
                              const RevisionSettings& settings) {
  RevisionTrace trace = start_trace("kernel", r);
  check_input(kb, r, trace, settings);
  Analysis a(kb.rules(), &r, settings);
  std::vector<bool> keep(a.size(), true), eligible(a.size(), true);
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a.hits_r[i] || a.graph.self_loop(i)) keep[i] = eligible[i] = false;
  }
  for (auto v : internal_cover(a, eligible, std::vector<bool>(a.size(), false),
                               zero_cost(a), incision, settings))
    keep[v] = false;
  return keep_and_add(kb, a, keep, r, trace, settings);
}

RevisionOutcome consolidate(const ExplanationKB& kb, IncisionPolicy incision,
                            const RevisionSettings& settings) {
  require_schema(kb, settings);
  RevisionTrace trace = start_trace("consolidation", Rule{"", FeatureFormula::bottom(),
                                                         ClassFormula::top()});
  Analysis a(kb.rules(), nullptr, settings);
  std::vector<bool> eligible(a.size(), true);
  ResultBuilder builder(kb);
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a.graph.self_loop(i)) {
      eligible[i] = false;
      builder.remove(a.rules[i].id);
    }
  }
  for (auto v : internal_cover(a, eligible, std::vector<bool>(a.size(), false),
                               zero_cost(a), incision, settings))
    builder.remove(a.rules[v].id);
  trace.accepted = true;
  return finish(kb, builder, trace, a.graph.edges(), settings);
}

RevisionOutcome screened_revise(const ExplanationKB& kb, const Rule& r,
                                const std::vector<std::string>& protected_ids,
                                SelectionPolicy inner,
                                const RevisionSettings& settings) {
  RevisionTrace trace = start_trace("screened", r);
  check_input(kb, r, trace, settings);
  for (const auto& id : protected_ids)
    if (!kb.find(id)) throw ValidationError("protected rule " + id + " is not in K");
  Analysis a(kb.rules(), &r, settings);
  const auto prot = mask_of(a, protected_ids);
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (prot[i] && a.hits_r[i]) {
      trace.effective_input = rejected_input(r);
      trace.notes.push_back("input conflicts with protected rule " + a.rules[i].id);
      return unchanged(kb, trace, a.witnesses, settings);
    }
  }
  auto keep = partial_meet_keep(a, prot, inner, settings);
  return keep_and_add(kb, a, keep, r, trace, settings);
}

RevisionOutcome credibility_limited_revise(const ExplanationKB& kb, const Rule& r,
                                           CredibilityTest test, SelectionPolicy inner,
                                           const RevisionSettings& settings) {
  RevisionTrace trace = start_trace("credibility-limited", r);
  check_input(kb, r, trace, settings);
  bool credible = true;
  std::string why;
  switch (test.kind) {
    case CredibilityKind::kConsistentWithKd:
      for (const auto& q : kb.kd()) {
        if (conflict(q, r, settings.scope)) {
          credible = false;
          why = "input conflicts with data rule " + q.id;
          break;
        }
      }
      break;
    case CredibilityKind::kTauCoherent: {
      if (!settings.table) throw ValidationError("tau credibility test needs a table");
      const double tau = tau_coherence(r, *settings.table).ratio();
      credible = tau >= test.threshold;
      if (!credible) why = "input tau " + std::to_string(tau) + " below threshold";
      break;
    }
    case CredibilityKind::kAlwaysCredible:
      break;
  }
  if (!credible) {
    trace.effective_input = rejected_input(r);
    trace.notes.push_back(why);
    return unchanged(kb, trace, {}, settings);
  }
  RevisionOutcome out = partial_meet_revise(kb, r, inner, settings);
  out.trace.operator_name = "credibility-limited";
  return out;
}

RevisionOutcome selective_revise(
    const ExplanationKB& kb, const Rule& r, WeakeningStrategy strategy,
    const std::optional<std::vector<std::string>>& protected_ids,
    SelectionPolicy inner, const RevisionSettings& settings) {
  RevisionTrace trace = start_trace("selective", r);
  check_input(kb, r, trace, settings);
  Analysis a(kb.rules(), &r, settings);
  std::vector<bool> prot(a.size(), true);
  if (protected_ids) {
    for (const auto& id : *protected_ids)
      if (!kb.find(id)) throw ValidationError("protected rule " + id + " is not in K");
    prot = mask_of(a, *protected_ids);
  }
  std::vector<Rule> blockers;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (prot[i] && a.hits_r[i]) blockers.push_back(a.rules[i]);
  std::optional<Rule> effective = r;
  if (!blockers.empty()) effective = weaken(r, blockers, strategy, settings.scope);
  if (!effective) {
    trace.effective_input = rejected_input(r);
    trace.notes.push_back("no acceptable weakening of the input");
    return unchanged(kb, trace, a.witnesses, settings);
  }
  if (!blockers.empty()) {
    ResultBuilder probe(kb);
    effective->id = probe.fresh_id(r.id, "_w");
  }
  Analysis inner_a(kb.rules(), &*effective, settings);
  auto keep = partial_meet_keep(inner_a, prot, inner, settings);
  return keep_and_add(kb, inner_a, keep, *effective, trace, settings);
}

namespace {

RevisionOutcome scenario_s1(const ExplanationKB& kb, const Rule& r,
                            const ScenarioConfig& config,
                            const RevisionSettings& settings, RevisionTrace trace) {
  Analysis a(kb.rules(), &r, settings);
  std::optional<std::string> slot;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!a.hits_r[i] || !kb.in_kd(a.rules[i].id)) continue;
    if (config.kd_update == KdUpdate::kForbid) {
      trace.effective_input = rejected_input(r);
      trace.notes.push_back("input conflicts with data rule " + a.rules[i].id +
                            " and K_d updates are forbidden");
      return unchanged(kb, trace, a.witnesses, settings);
    }
    if (!slot) slot = a.rules[i].id;
  }
  std::vector<bool> eligible(a.size(), true);
  std::vector<std::size_t> cut;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a.hits_r[i] || a.graph.self_loop(i)) {
      eligible[i] = false;
      cut.push_back(i);
    }
  }
  std::vector<bool> hard(a.size(), false);
  if (config.protected_ids) hard = mask_of(a, *config.protected_ids);
  for (auto v : internal_cover(a, eligible, hard, zero_cost(a), config.incision, settings))
    cut.push_back(v);

  ResultBuilder builder(kb);
  const bool replace = slot && is_instance_rule(kb.schema(), r);
  for (auto i : cut)
    if (!replace || a.rules[i].id != *slot) builder.remove(a.rules[i].id);
  auto added = builder.add(r, replace ? &*slot : nullptr);
  if (replace && !added) builder.remove(*slot);
  if (replace && added) trace.notes.push_back("data rule " + *slot + " replaced by the input");
  trace.effective_input = added ? *added : r;
  cut_and_weaken(a, cut, config.weakening.value_or(WeakeningStrategy::kBodyRestriction),
                 settings, builder, trace);
  trace.accepted = true;
  return finish(kb, builder, trace, a.witnesses, settings);
}

// Coverage lost by a rule when restricted away from its conflict neighbours.
std::vector<std::uint64_t> shrink_costs(const Analysis& a, const std::vector<bool>& eligible,
                                        const RevisionSettings& settings) {
  std::vector<std::uint64_t> cost(a.size(), 0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!eligible[i]) continue;
    std::vector<Rule> nbrs;
    for (std::size_t j = 0; j < a.size(); ++j)
      if (j != i && eligible[j] && a.graph.adjacent(i, j)) nbrs.push_back(a.rules[j]);
    if (nbrs.empty()) continue;
    const std::uint64_t before = coverage(a.rules[i].body, settings.scope);
    auto w = weaken(a.rules[i], nbrs, WeakeningStrategy::kBodyRestriction, settings.scope);
    cost[i] = before - (w ? coverage(w->body, settings.scope) : 0);
  }
  return cost;
}

RevisionOutcome scenario_s2(const ExplanationKB& kb, const Rule& r,
                            const ScenarioConfig& config,
                            const RevisionSettings& settings, RevisionTrace trace) {
  Analysis a(kb.rules(), &r, settings);
  std::vector<std::string> prot_ids;
  if (config.protected_ids) {
    prot_ids = *config.protected_ids;
  } else {
    for (const auto& q : kb.kd()) prot_ids.push_back(q.id);
  }
  const auto prot = mask_of(a, prot_ids);
  const WeakeningStrategy strategy =
      config.weakening.value_or(WeakeningStrategy::kBodyRestriction);
  bool hits_protected = false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (prot[i] && a.hits_r[i]) hits_protected = true;

  std::vector<bool> eligible(a.size(), true);
  std::vector<std::size_t> cut;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const bool forced = a.graph.self_loop(i) || (!hits_protected && a.hits_r[i]);
    if (forced) {
      eligible[i] = false;
      cut.push_back(i);
    }
  }
  for (auto v : internal_cover(a, eligible, prot, shrink_costs(a, eligible, settings),
                               config.incision, settings))
    cut.push_back(v);

  ResultBuilder builder(kb);
  for (auto i : cut) builder.remove(a.rules[i].id);
  if (!hits_protected) {
    auto added = builder.add(r);
    trace.effective_input = added ? *added : r;
    trace.accepted = true;
    cut_and_weaken(a, cut, strategy, settings, builder, trace);
    return finish(kb, builder, trace, a.witnesses, settings);
  }
  cut_and_weaken(a, cut, strategy, settings, builder, trace);
  const auto blockers = conflicting_in(builder.rules(), r, settings.scope);
  auto effective = weaken(r, blockers, strategy, settings.scope);
  if (!effective) {
    trace.effective_input = rejected_input(r);
    trace.notes.push_back("input cannot be weakened around protected rules");
    trace.accepted = false;
    return finish(kb, builder, trace, a.witnesses, settings);
  }
  if (!blockers.empty()) effective->id = builder.fresh_id(r.id, "_w");
  auto added = builder.add(*effective);
  trace.effective_input = added ? *added : *effective;
  trace.accepted = true;
  return finish(kb, builder, trace, a.witnesses, settings);
}

}  // namespace

RevisionOutcome scenario_revise(const ExplanationKB& kb, const Rule& r,
                                const ScenarioConfig& config,
                                const RevisionSettings& settings) {
  RevisionTrace trace = start_trace(config.scenario == Scenario::kS1   ? "s1"
                                    : config.scenario == Scenario::kS2 ? "s2"
                                                                       : "s3",
                                    r);
  check_input(kb, r, trace, settings);
  switch (config.scenario) {
    case Scenario::kS1:
      return scenario_s1(kb, r, config, settings, trace);
    case Scenario::kS2:
      return scenario_s2(kb, r, config, settings, trace);
    case Scenario::kS3: {
      if (config.protected_ids) {
        std::set<std::string> given(config.protected_ids->begin(),
                                    config.protected_ids->end());
        for (const auto& q : kb.rules())
          if (!given.count(q.id))
            throw ValidationError("S3 protects every rule of K; " + q.id + " is missing");
      }
      RevisionOutcome out = selective_revise(
          kb, r, config.weakening.value_or(WeakeningStrategy::kRejectOnly),
          config.protected_ids, config.selection, settings);
      out.trace.operator_name = "s3";
      return out;
    }
  }
  throw Error("unknown scenario");
}

}  // namespace xkb
