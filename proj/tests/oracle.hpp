#pragma once

// Brute-force reference semantics used as independent test oracles. Works
// directly on the formula trees and enumerates every point of V, sharing no
// code with the library's compiled evaluator or model search.

#include <cstdint>
#include <functional>
#include <vector>

#include "xkb/rule.hpp"
#include "xkb/table.hpp"

namespace xkb::oracle {

inline std::vector<DataPoint> all_points(const Schema& schema) {
  std::vector<DataPoint> out;
  DataPoint p;
  p.values.assign(schema.feature_count(), 0);
  while (true) {
    out.push_back(p);
    std::size_t f = 0;
    for (; f < schema.feature_count(); ++f) {
      if (++p.values[f] < schema.domain_size(f)) break;
      p.values[f] = 0;
    }
    if (f == schema.feature_count()) break;
  }
  return out;
}

inline bool eval(const Schema& schema, const FeatureFormula& f,
                 const DataPoint& x) {
  switch (f.kind()) {
    case NodeKind::kTrue:
      return true;
    case NodeKind::kFalse:
      return false;
    case NodeKind::kAtom: {
      const auto& decl = schema.features()[*schema.feature_index(f.atom().feature)];
      return decl.domain[x.values[*schema.feature_index(f.atom().feature)]] ==
             f.atom().value;
    }
    case NodeKind::kNot:
      return !eval(schema, f.child(), x);
    case NodeKind::kAnd:
      for (const auto& c : f.children())
        if (!eval(schema, c, x)) return false;
      return true;
    case NodeKind::kOr:
      for (const auto& c : f.children())
        if (eval(schema, c, x)) return true;
      return false;
  }
  return false;
}

/// Class extent as a bit per class index.
inline std::vector<bool> classes(const Schema& schema, const ClassFormula& f) {
  std::vector<bool> out(schema.class_count());
  for (std::size_t c = 0; c < schema.class_count(); ++c) {
    std::function<bool(const ClassFormula&)> holds = [&](const ClassFormula& g) {
      switch (g.kind()) {
        case NodeKind::kTrue:
          return true;
        case NodeKind::kFalse:
          return false;
        case NodeKind::kAtom:
          return g.atom().name == schema.classes()[c];
        case NodeKind::kNot:
          return !holds(g.child());
        case NodeKind::kAnd:
          for (const auto& h : g.children())
            if (!holds(h)) return false;
          return true;
        case NodeKind::kOr:
          for (const auto& h : g.children())
            if (holds(h)) return true;
          return false;
      }
      return false;
    };
    out[c] = holds(f);
  }
  return out;
}

inline bool subset(const std::vector<bool>& a, const std::vector<bool>& b) {
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] && !b[i]) return false;
  return true;
}

inline bool disjoint(const std::vector<bool>& a, const std::vector<bool>& b) {
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] && b[i]) return false;
  return true;
}

/// Points of the universe under consideration: all of V, or the rows of D.
inline std::vector<DataPoint> universe(const Schema& schema,
                                       const ClassifierTable* table) {
  if (!table) return all_points(schema);
  std::vector<DataPoint> out;
  for (const auto& row : table->rows()) out.push_back(row.point);
  return out;
}

/// Literal reading of the consistency definition: every point covered by two
/// (not necessarily distinct) rules gets intersecting heads.
inline bool consistent(const Schema& schema, const std::vector<Rule>& rules,
                       const std::vector<DataPoint>& points) {
  std::vector<std::vector<bool>> heads;
  for (const auto& r : rules) heads.push_back(classes(schema, r.head));
  for (const auto& x : points) {
    std::vector<std::size_t> covering;
    for (std::size_t i = 0; i < rules.size(); ++i)
      if (eval(schema, rules[i].body, x)) covering.push_back(i);
    for (std::size_t i : covering)
      for (std::size_t j : covering)
        if (disjoint(heads[i], heads[j])) return false;
  }
  return true;
}

/// Literal reading of enforcement A ⊒ B.
inline bool enforces(const Schema& schema, const std::vector<Rule>& a,
                     const std::vector<Rule>& b,
                     const std::vector<DataPoint>& points) {
  for (const auto& rj : b) {
    const auto hj = classes(schema, rj.head);
    for (const auto& x : points) {
      if (!eval(schema, rj.body, x)) continue;
      bool covered = false;
      for (const auto& ri : a) {
        if (eval(schema, ri.body, x) && subset(classes(schema, ri.head), hj)) {
          covered = true;
          break;
        }
      }
      if (!covered) return false;
    }
  }
  return true;
}

struct Ratio {
  bool vacuous = true;
  std::size_t num = 0;
  std::size_t den = 0;
};

inline Ratio tau(const Schema& schema, const Rule& r,
                 const ClassifierTable& table) {
  Ratio out;
  const auto head = classes(schema, r.head);
  for (const auto& row : table.rows()) {
    if (!eval(schema, r.body, row.point)) continue;
    out.vacuous = false;
    ++out.den;
    if (head[row.label]) ++out.num;
  }
  return out;
}

}  // namespace xkb::oracle
