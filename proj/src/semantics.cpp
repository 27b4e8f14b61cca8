#include "xkb/semantics.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "xkb/error.hpp"

namespace xkb {

// ---------------------------------------------------------------- ClassSet

ClassSet ClassSet::all(std::size_t universe) {
  ClassSet s(universe);
  for (std::size_t c = 0; c < universe; ++c) s.bits_[c] = true;
  return s;
}

bool ClassSet::empty() const {
  return std::none_of(bits_.begin(), bits_.end(), [](bool b) { return b; });
}

bool ClassSet::full() const {
  return std::all_of(bits_.begin(), bits_.end(), [](bool b) { return b; });
}

std::size_t ClassSet::count() const {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), true));
}

ClassSet ClassSet::operator&(const ClassSet& other) const {
  ClassSet out(bits_.size());
  for (std::size_t c = 0; c < bits_.size(); ++c)
    out.bits_[c] = bits_[c] && other.bits_[c];
  return out;
}

ClassSet ClassSet::operator|(const ClassSet& other) const {
  ClassSet out(bits_.size());
  for (std::size_t c = 0; c < bits_.size(); ++c)
    out.bits_[c] = bits_[c] || other.bits_[c];
  return out;
}

ClassSet ClassSet::operator~() const {
  ClassSet out(bits_.size());
  for (std::size_t c = 0; c < bits_.size(); ++c) out.bits_[c] = !bits_[c];
  return out;
}

bool ClassSet::subset_of(const ClassSet& other) const {
  for (std::size_t c = 0; c < bits_.size(); ++c)
    if (bits_[c] && !other.bits_[c]) return false;
  return true;
}

bool ClassSet::intersects(const ClassSet& other) const {
  for (std::size_t c = 0; c < bits_.size(); ++c)
    if (bits_[c] && other.bits_[c]) return true;
  return false;
}

std::vector<std::string> ClassSet::names(const Schema& schema) const {
  std::vector<std::string> out;
  for (std::size_t c = 0; c < bits_.size(); ++c)
    if (bits_[c]) out.push_back(schema.classes()[c]);
  return out;
}

// ------------------------------------------------------------------- Scope

Scope Scope::full_universe(Schema schema) {
  Scope s;
  s.schema_ = std::make_shared<const Schema>(std::move(schema));
  return s;
}

Scope Scope::dataset(std::shared_ptr<const ClassifierTable> table) {
  if (!table) throw ValidationError("dataset scope requires a table");
  Scope s;
  s.schema_ = std::shared_ptr<const Schema>(table, &table->schema());
  s.table_ = std::move(table);
  return s;
}

Scope Scope::dataset(ClassifierTable table) {
  return dataset(std::make_shared<const ClassifierTable>(std::move(table)));
}

// --------------------------------------------------------- CompiledFormula

CompiledFormula::CompiledFormula(const Schema& schema,
                                 const FeatureFormula& formula) {
  root_ = build(schema, formula);
  std::sort(features_.begin(), features_.end());
  features_.erase(std::unique(features_.begin(), features_.end()),
                  features_.end());
}

std::uint32_t CompiledFormula::build(const Schema& schema,
                                     const FeatureFormula& f) {
  Node node{f.kind(), 0, 0, {}};
  if (f.is_atom()) {
    auto feature = schema.feature_index(f.atom().feature);
    if (!feature) throw ValidationError("unknown feature " + f.atom().feature);
    auto value = schema.value_index(*feature, f.atom().value);
    if (!value)
      throw ValidationError("unknown value " + f.atom().value +
                            " for feature " + f.atom().feature);
    node.feature = static_cast<std::uint32_t>(*feature);
    node.value = static_cast<std::uint32_t>(*value);
    features_.push_back(*feature);
  }
  for (const auto& c : f.children()) node.children.push_back(build(schema, c));
  nodes_.push_back(std::move(node));
  return static_cast<std::uint32_t>(nodes_.size() - 1);
}

bool CompiledFormula::eval(std::span<const std::uint32_t> point) const {
  return eval_node(root_, point);
}

bool CompiledFormula::eval_node(std::uint32_t n,
                                std::span<const std::uint32_t> point) const {
  const Node& node = nodes_[n];
  switch (node.kind) {
    case NodeKind::kAtom:
      return point[node.feature] == node.value;
    case NodeKind::kTrue:
      return true;
    case NodeKind::kFalse:
      return false;
    case NodeKind::kNot:
      return !eval_node(node.children.front(), point);
    case NodeKind::kAnd:
      for (auto c : node.children)
        if (!eval_node(c, point)) return false;
      return true;
    case NodeKind::kOr:
      for (auto c : node.children)
        if (eval_node(c, point)) return true;
      return false;
  }
  return false;
}

CompiledFormula::Truth CompiledFormula::eval_partial(
    std::span<const std::uint32_t> assignment) const {
  return partial_node(root_, assignment);
}

CompiledFormula::Truth CompiledFormula::partial_node(
    std::uint32_t n, std::span<const std::uint32_t> assignment) const {
  const Node& node = nodes_[n];
  switch (node.kind) {
    case NodeKind::kAtom: {
      const auto v = assignment[node.feature];
      if (v == kUnassigned) return Truth::kUnknown;
      return v == node.value ? Truth::kTrue : Truth::kFalse;
    }
    case NodeKind::kTrue:
      return Truth::kTrue;
    case NodeKind::kFalse:
      return Truth::kFalse;
    case NodeKind::kNot: {
      const Truth t = partial_node(node.children.front(), assignment);
      if (t == Truth::kUnknown) return t;
      return t == Truth::kTrue ? Truth::kFalse : Truth::kTrue;
    }
    case NodeKind::kAnd: {
      Truth acc = Truth::kTrue;
      for (auto c : node.children) {
        const Truth t = partial_node(c, assignment);
        if (t == Truth::kFalse) return t;
        if (t == Truth::kUnknown) acc = t;
      }
      return acc;
    }
    case NodeKind::kOr: {
      Truth acc = Truth::kFalse;
      for (auto c : node.children) {
        const Truth t = partial_node(c, assignment);
        if (t == Truth::kTrue) return t;
        if (t == Truth::kUnknown) acc = t;
      }
      return acc;
    }
  }
  return Truth::kUnknown;
}

// ------------------------------------------------------------- model search

namespace {

using Truth = CompiledFormula::Truth;

Truth literal_truth(const Literal& lit, std::span<const std::uint32_t> a) {
  const Truth t = lit.formula->eval_partial(a);
  if (lit.positive || t == Truth::kUnknown) return t;
  return t == Truth::kTrue ? Truth::kFalse : Truth::kTrue;
}

bool search(const Schema& schema, std::span<const Literal> literals,
            const std::vector<std::size_t>& order, std::size_t depth,
            std::vector<std::uint32_t>& assignment) {
  bool all_true = true;
  for (const auto& lit : literals) {
    const Truth t = literal_truth(lit, assignment);
    if (t == Truth::kFalse) return false;
    if (t == Truth::kUnknown) all_true = false;
  }
  if (all_true) return true;
  if (depth == order.size()) return false;
  const std::size_t feature = order[depth];
  for (std::uint32_t v = 0; v < schema.domain_size(feature); ++v) {
    assignment[feature] = v;
    if (search(schema, literals, order, depth + 1, assignment)) return true;
  }
  assignment[feature] = CompiledFormula::kUnassigned;
  return false;
}

std::uint64_t grid_size(const Schema& schema,
                        const std::vector<std::size_t>& features) {
  constexpr std::uint64_t kGridLimit = std::uint64_t{1} << 20;
  std::uint64_t cells = 1;
  for (auto f : features) {
    cells *= schema.domain_size(f);
    if (cells > kGridLimit) {
      std::string names;
      for (auto g : features) {
        if (!names.empty()) names += ", ";
        names += schema.features()[g].name;
      }
      throw LimitError("feature grid too large (> 2^20 cells) over features: " +
                       names);
    }
  }
  return cells;
}

// Calls fn(point) for every assignment of `features` (others at value 0).
template <class Fn>
void for_each_cell(const Schema& schema, const std::vector<std::size_t>& features,
                   Fn&& fn) {
  (void)grid_size(schema, features);
  DataPoint p;
  p.values.assign(schema.feature_count(), 0);
  while (true) {
    fn(p);
    std::size_t k = 0;
    for (; k < features.size(); ++k) {
      const auto f = features[k];
      if (++p.values[f] < schema.domain_size(f)) break;
      p.values[f] = 0;
    }
    if (k == features.size()) return;
  }
}

ClassSet class_extent_impl(const ClassFormula& f, const Schema& schema) {
  switch (f.kind()) {
    case NodeKind::kAtom: {
      ClassSet s(schema.class_count());
      auto c = schema.class_index(f.atom().name);
      if (!c) throw ValidationError("unknown class " + f.atom().name);
      s.insert(*c);
      return s;
    }
    case NodeKind::kTrue:
      return ClassSet::all(schema.class_count());
    case NodeKind::kFalse:
      return ClassSet(schema.class_count());
    case NodeKind::kNot:
      return ~class_extent_impl(f.child(), schema);
    case NodeKind::kAnd: {
      ClassSet acc = ClassSet::all(schema.class_count());
      for (const auto& c : f.children()) acc = acc & class_extent_impl(c, schema);
      return acc;
    }
    case NodeKind::kOr: {
      ClassSet acc(schema.class_count());
      for (const auto& c : f.children()) acc = acc | class_extent_impl(c, schema);
      return acc;
    }
  }
  return ClassSet(schema.class_count());
}

// Per-rule data reused across pairwise checks.
struct PreparedRule {
  const Rule* rule;
  CompiledFormula body;
  ClassSet head;
  std::vector<bool> rows;  // Dataset scope only: rows of D inside the body
};

std::vector<PreparedRule> prepare(std::span<const Rule> rules,
                                  const Scope& scope) {
  std::vector<PreparedRule> out;
  out.reserve(rules.size());
  for (const auto& r : rules) {
    PreparedRule p{&r, CompiledFormula(scope.schema(), r.body),
                   class_extent_impl(r.head, scope.schema()),
                   {}};
    if (scope.is_dataset()) {
      const auto& rows = scope.table().rows();
      p.rows.resize(rows.size());
      for (std::size_t i = 0; i < rows.size(); ++i)
        p.rows[i] = p.body.eval(rows[i].point.values);
    }
    out.push_back(std::move(p));
  }
  return out;
}

std::optional<DataPoint> joint_point(const PreparedRule& a,
                                     const PreparedRule& b, const Scope& scope) {
  if (scope.is_dataset()) {
    for (std::size_t i = 0; i < a.rows.size(); ++i)
      if (a.rows[i] && b.rows[i]) return scope.table().rows()[i].point;
    return std::nullopt;
  }
  const Literal lits[] = {{&a.body, true}, {&b.body, true}};
  return find_model(scope.schema(), lits);
}

std::optional<DataPoint> body_point(const PreparedRule& a, const Scope& scope) {
  if (scope.is_dataset()) {
    for (std::size_t i = 0; i < a.rows.size(); ++i)
      if (a.rows[i]) return scope.table().rows()[i].point;
    return std::nullopt;
  }
  const Literal lits[] = {{&a.body, true}};
  return find_model(scope.schema(), lits);
}

}  // namespace

std::optional<DataPoint> find_model(const Schema& schema,
                                    std::span<const Literal> literals) {
  std::vector<std::size_t> order;
  for (const auto& lit : literals)
    order.insert(order.end(), lit.formula->features().begin(),
                 lit.formula->features().end());
  std::sort(order.begin(), order.end());
  order.erase(std::unique(order.begin(), order.end()), order.end());
  std::vector<std::uint32_t> assignment(schema.feature_count(),
                                        CompiledFormula::kUnassigned);
  if (!search(schema, literals, order, 0, assignment)) return std::nullopt;
  DataPoint p;
  p.values.reserve(assignment.size());
  for (auto v : assignment) p.values.push_back(v == CompiledFormula::kUnassigned ? 0 : v);
  return p;
}

std::optional<DataPoint> find_point(const Scope& scope,
                                    std::span<const Literal> literals) {
  if (!scope.is_dataset()) return find_model(scope.schema(), literals);
  for (const auto& row : scope.table().rows()) {
    bool ok = true;
    for (const auto& lit : literals) {
      if (lit.formula->eval(row.point.values) != lit.positive) {
        ok = false;
        break;
      }
    }
    if (ok) return row.point;
  }
  return std::nullopt;
}

bool eval(const Schema& schema, const FeatureFormula& formula,
          const DataPoint& point) {
  if (point.values.size() != schema.feature_count())
    throw ValidationError("point does not match schema");
  return CompiledFormula(schema, formula).eval(point.values);
}

Extent extent(const FeatureFormula& formula, const Scope& scope) {
  const Schema& schema = scope.schema();
  CompiledFormula compiled(schema, formula);
  Extent out;
  if (scope.is_dataset()) {
    out.bound_features.resize(schema.feature_count());
    for (std::size_t f = 0; f < schema.feature_count(); ++f)
      out.bound_features[f] = f;
    for (const auto& row : scope.table().rows())
      if (compiled.eval(row.point.values)) out.points.push_back(row.point);
    return out;
  }
  out.bound_features = compiled.features();
  for (std::size_t f = 0; f < schema.feature_count(); ++f) {
    if (!std::binary_search(out.bound_features.begin(), out.bound_features.end(), f))
      out.multiplier *= schema.domain_size(f);
  }
  for_each_cell(schema, out.bound_features, [&](const DataPoint& p) {
    if (compiled.eval(p.values)) out.points.push_back(p);
  });
  return out;
}

std::vector<DataPoint> expand(const Schema& schema, const Extent& e) {
  std::vector<std::size_t> free;
  for (std::size_t f = 0; f < schema.feature_count(); ++f) {
    if (!std::binary_search(e.bound_features.begin(), e.bound_features.end(), f))
      free.push_back(f);
  }
  std::vector<DataPoint> out;
  for (const auto& base : e.points) {
    DataPoint p = base;
    for (auto f : free) p.values[f] = 0;
    while (true) {
      out.push_back(p);
      std::size_t k = 0;
      for (; k < free.size(); ++k) {
        if (++p.values[free[k]] < schema.domain_size(free[k])) break;
        p.values[free[k]] = 0;
      }
      if (k == free.size()) break;
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

ClassSet class_extent(const ClassFormula& formula, const Schema& schema) {
  return class_extent_impl(formula, schema);
}

std::optional<DataPoint> satisfiable(const FeatureFormula& formula,
                                     const Schema& schema) {
  CompiledFormula compiled(schema, formula);
  const Literal lits[] = {{&compiled, true}};
  return find_model(schema, lits);
}

std::optional<ConflictWitness> conflict(const Rule& a, const Rule& b,
                                        const Scope& scope) {
  const Rule pair[] = {a, b};
  auto prepared = prepare(pair, scope);
  if (prepared[0].head.intersects(prepared[1].head)) return std::nullopt;
  auto point = joint_point(prepared[0], prepared[1], scope);
  if (!point) return std::nullopt;
  return ConflictWitness{a.id, b.id, std::move(*point), prepared[0].head,
                         prepared[1].head};
}

ConsistencyReport check_consistency(std::span<const Rule> rules,
                                    const Scope& scope) {
  auto prepared = prepare(rules, scope);
  ConsistencyReport report;
  for (const auto& p : prepared) {
    if (!p.head.empty()) continue;
    if (auto point = body_point(p, scope))
      report.self_conflicts.push_back(
          {p.rule->id, p.rule->id, std::move(*point), p.head, p.head});
  }
  for (std::size_t i = 0; i < prepared.size(); ++i) {
    for (std::size_t j = i + 1; j < prepared.size(); ++j) {
      if (prepared[i].head.intersects(prepared[j].head)) continue;
      if (auto point = joint_point(prepared[i], prepared[j], scope))
        report.edges.push_back({prepared[i].rule->id, prepared[j].rule->id,
                                std::move(*point), prepared[i].head,
                                prepared[j].head});
    }
  }
  report.consistent = report.edges.empty() && report.self_conflicts.empty();
  return report;
}

bool is_consistent(std::span<const Rule> rules, const Scope& scope) {
  auto prepared = prepare(rules, scope);
  for (const auto& p : prepared)
    if (p.head.empty() && body_point(p, scope)) return false;
  for (std::size_t i = 0; i < prepared.size(); ++i)
    for (std::size_t j = i + 1; j < prepared.size(); ++j)
      if (!prepared[i].head.intersects(prepared[j].head) &&
          joint_point(prepared[i], prepared[j], scope))
        return false;
  return true;
}

EnforcementReport enforces(std::span<const Rule> enforcing,
                           std::span<const Rule> enforced, const Scope& scope) {
  auto left = prepare(enforcing, scope);
  auto right = prepare(enforced, scope);
  EnforcementReport report;
  for (const auto& target : right) {
    std::vector<Literal> lits{{&target.body, true}};
    for (const auto& cand : left)
      if (cand.head.subset_of(target.head)) lits.push_back({&cand.body, false});
    if (auto point = find_point(scope, lits)) {
      report.holds = false;
      report.rule_id = target.rule->id;
      report.counterexample = std::move(point);
      return report;
    }
  }
  return report;
}

CoherenceValue tau_coherence(const Rule& rule, const ClassifierTable& table) {
  CompiledFormula body(table.schema(), rule.body);
  const ClassSet head = class_extent_impl(rule.head, table.schema());
  CoherenceValue value;
  for (const auto& row : table.rows()) {
    if (!body.eval(row.point.values)) continue;
    ++value.denominator;
    if (head.contains(row.label)) ++value.numerator;
  }
  value.vacuous = value.denominator == 0;
  return value;
}

CompletenessReport check_complete(std::span<const Rule> rules,
                                  const ClassifierTable& table) {
  const Schema& schema = table.schema();
  CompletenessReport report;
  std::set<std::string> seen_keys;
  std::set<DataPoint> covered;
  std::size_t distinct = 0;
  for (const auto& r : rules) {
    if (!seen_keys.insert(rule_key(r)).second) continue;
    ++distinct;
    if (!is_instance_rule(schema, r)) {
      report.extras.push_back(r.id);
      continue;
    }
    DataPoint p;
    p.values.assign(schema.feature_count(), 0);
    std::vector<const FeatureFormula*> atoms;
    if (r.body.is_atom()) {
      atoms.push_back(&r.body);
    } else {
      for (const auto& c : r.body.children()) atoms.push_back(&c);
    }
    for (const auto* a : atoms) {
      const auto f = *schema.feature_index(a->atom().feature);
      p.values[f] = static_cast<std::uint32_t>(*schema.value_index(f, a->atom().value));
    }
    const auto cls = *schema.class_index(r.head.atom().name);
    auto label = table.label(p);
    if (label && *label == cls) {
      covered.insert(p);
    } else {
      report.extras.push_back(r.id);
    }
  }
  for (const auto& row : table.rows())
    if (!covered.count(row.point)) report.missing.push_back(row.point);
  report.complete = report.extras.empty() && report.missing.empty() &&
                    distinct == table.size();
  return report;
}

std::uint64_t coverage(const FeatureFormula& formula, const Scope& scope) {
  return extent(formula, scope).count();
}

}  // namespace xkb
