#include "xkb/formula.hpp"

#include <algorithm>
#include <set>

namespace xkb {
namespace {

bool is_word_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
         (c >= '0' && c <= '9') || c == '_' || c == '.' || c == '-' ||
         c == '+';
}

std::string render_atom(const FeatureAtom& a) {
  return a.feature + "=" + render_value(a.value);
}
std::string render_atom(const ClassAtom& a) { return a.name; }

template <class Atom>
std::string render_impl(const Formula<Atom>& f) {
  switch (f.kind()) {
    case NodeKind::kAtom:
      return render_atom(f.atom());
    case NodeKind::kTrue:
      return "true";
    case NodeKind::kFalse:
      return "false";
    case NodeKind::kNot: {
      const auto& c = f.child();
      const bool bare = c.kind() != NodeKind::kAnd && c.kind() != NodeKind::kOr;
      return bare ? "!" + render_impl(c) : "!(" + render_impl(c) + ")";
    }
    case NodeKind::kAnd:
    case NodeKind::kOr: {
      const bool is_and = f.kind() == NodeKind::kAnd;
      std::string out;
      for (std::size_t i = 0; i < f.children().size(); ++i) {
        const auto& c = f.children()[i];
        if (i) out += is_and ? " & " : " | ";
        const bool wrap = is_and ? (c.kind() == NodeKind::kOr ||
                                    c.kind() == NodeKind::kAnd)
                                 : c.kind() == NodeKind::kOr;
        out += wrap ? "(" + render_impl(c) + ")" : render_impl(c);
      }
      return out;
    }
  }
  return {};
}

template <class Atom>
Formula<Atom> nnf(const Formula<Atom>& f, bool negated) {
  using F = Formula<Atom>;
  switch (f.kind()) {
    case NodeKind::kAtom:
      return negated ? F::negate(f) : f;
    case NodeKind::kTrue:
      return negated ? F::bottom() : F::top();
    case NodeKind::kFalse:
      return negated ? F::top() : F::bottom();
    case NodeKind::kNot:
      return nnf(f.child(), !negated);
    case NodeKind::kAnd:
    case NodeKind::kOr: {
      std::vector<F> parts;
      parts.reserve(f.children().size());
      for (const auto& c : f.children()) parts.push_back(nnf(c, negated));
      const bool conjunctive = (f.kind() == NodeKind::kAnd) != negated;
      return conjunctive ? F::conj(std::move(parts)) : F::disj(std::move(parts));
    }
  }
  return f;
}

// Input is in NNF.
template <class Atom>
Formula<Atom> sort_operands(const Formula<Atom>& f) {
  using F = Formula<Atom>;
  if (f.kind() != NodeKind::kAnd && f.kind() != NodeKind::kOr) return f;
  std::vector<F> flat;
  for (const auto& c : f.children()) {
    F canon = sort_operands(c);
    if (canon.kind() == f.kind()) {
      for (const auto& g : canon.children()) flat.push_back(g);
    } else {
      flat.push_back(std::move(canon));
    }
  }
  std::vector<std::pair<std::string, F>> keyed;
  keyed.reserve(flat.size());
  for (auto& c : flat) keyed.emplace_back(render_impl(c), std::move(c));
  std::sort(keyed.begin(), keyed.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  keyed.erase(std::unique(keyed.begin(), keyed.end(),
                          [](const auto& a, const auto& b) {
                            return a.first == b.first;
                          }),
              keyed.end());
  std::vector<F> parts;
  parts.reserve(keyed.size());
  for (auto& [key, c] : keyed) parts.push_back(std::move(c));
  return f.kind() == NodeKind::kAnd ? F::conj(std::move(parts))
                                    : F::disj(std::move(parts));
}

void collect_features(const FeatureFormula& f, std::set<std::string>& out) {
  if (f.is_atom()) {
    out.insert(f.atom().feature);
    return;
  }
  for (const auto& c : f.children()) collect_features(c, out);
}

}  // namespace

FeatureFormula canonicalize(const FeatureFormula& f) {
  return sort_operands(nnf(f, false));
}
ClassFormula canonicalize(const ClassFormula& f) {
  return sort_operands(nnf(f, false));
}

std::string render(const FeatureFormula& f) { return render_impl(f); }
std::string render(const ClassFormula& f) { return render_impl(f); }

std::string render_value(const std::string& value) {
  if (!value.empty() && std::all_of(value.begin(), value.end(), is_word_char))
    return value;
  std::string out = "\"";
  for (char c : value) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  out += '"';
  return out;
}

std::vector<std::string> mentioned_features(const FeatureFormula& f) {
  std::set<std::string> names;
  collect_features(f, names);
  return {names.begin(), names.end()};
}

}  // namespace xkb
