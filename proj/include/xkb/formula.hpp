#pragma once

#include <compare>
#include <string>
#include <utility>
#include <vector>

namespace xkb {

enum class NodeKind { kAtom, kNot, kAnd, kOr, kTrue, kFalse };

/// (feature, value) atom. Values are kept verbatim as strings.
struct FeatureAtom {
  std::string feature;
  std::string value;
  auto operator<=>(const FeatureAtom&) const = default;
};

struct ClassAtom {
  std::string name;
  auto operator<=>(const ClassAtom&) const = default;
};

/// Propositional formula over an atom type. Value type; the builders keep
/// And/Or flattened and never produce an And/Or with fewer than two children.
template <class Atom>
class Formula {
 public:
  Formula() : kind_(NodeKind::kTrue) {}

  static Formula atom(Atom a) {
    Formula f(NodeKind::kAtom);
    f.atom_ = std::move(a);
    return f;
  }
  static Formula top() { return Formula(NodeKind::kTrue); }
  static Formula bottom() { return Formula(NodeKind::kFalse); }
  static Formula negate(Formula child) {
    Formula f(NodeKind::kNot);
    f.children_.push_back(std::move(child));
    return f;
  }
  static Formula conj(std::vector<Formula> children) {
    return junction(NodeKind::kAnd, std::move(children), top());
  }
  static Formula disj(std::vector<Formula> children) {
    return junction(NodeKind::kOr, std::move(children), bottom());
  }

  NodeKind kind() const { return kind_; }
  const Atom& atom() const { return atom_; }
  const std::vector<Formula>& children() const { return children_; }
  const Formula& child() const { return children_.front(); }

  bool is_atom() const { return kind_ == NodeKind::kAtom; }

  bool operator==(const Formula& other) const {
    return kind_ == other.kind_ && atom_ == other.atom_ &&
           children_ == other.children_;
  }

 private:
  explicit Formula(NodeKind kind) : kind_(kind) {}

  static Formula junction(NodeKind kind, std::vector<Formula> children,
                          Formula empty) {
    Formula f(kind);
    for (auto& c : children) {
      if (c.kind_ == kind) {
        for (auto& g : c.children_) f.children_.push_back(std::move(g));
      } else {
        f.children_.push_back(std::move(c));
      }
    }
    if (f.children_.empty()) return empty;
    if (f.children_.size() == 1) return std::move(f.children_.front());
    return f;
  }

  NodeKind kind_;
  Atom atom_{};
  std::vector<Formula> children_;
};

using FeatureFormula = Formula<FeatureAtom>;
using ClassFormula = Formula<ClassAtom>;

inline FeatureFormula feature_eq(std::string feature, std::string value) {
  return FeatureFormula::atom({std::move(feature), std::move(value)});
}
inline ClassFormula class_is(std::string name) {
  return ClassFormula::atom({std::move(name)});
}

template <class Atom>
Formula<Atom> operator&(Formula<Atom> a, Formula<Atom> b) {
  std::vector<Formula<Atom>> parts;
  parts.push_back(std::move(a));
  parts.push_back(std::move(b));
  return Formula<Atom>::conj(std::move(parts));
}

template <class Atom>
Formula<Atom> operator|(Formula<Atom> a, Formula<Atom> b) {
  std::vector<Formula<Atom>> parts;
  parts.push_back(std::move(a));
  parts.push_back(std::move(b));
  return Formula<Atom>::disj(std::move(parts));
}

template <class Atom>
Formula<Atom> operator!(Formula<Atom> a) {
  return Formula<Atom>::negate(std::move(a));
}

/// Negation normal form, flattened, operands sorted by rendering and
/// deduplicated. Constants and contradictions are left alone.
FeatureFormula canonicalize(const FeatureFormula& f);
ClassFormula canonicalize(const ClassFormula& f);

/// DSL text for a formula, minimal parentheses.
std::string render(const FeatureFormula& f);
std::string render(const ClassFormula& f);

/// Quotes a value literal when it is not a bare DSL word.
std::string render_value(const std::string& value);

/// Names of features mentioned anywhere in the formula, sorted, unique.
std::vector<std::string> mentioned_features(const FeatureFormula& f);

}  // namespace xkb
