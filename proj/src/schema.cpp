#include "xkb/schema.hpp"

#include <limits>

#include "xkb/error.hpp"

namespace xkb {
namespace {

bool is_identifier(const std::string& s) {
  static const char* const kReserved[] = {"schema", "feature", "classes", "data",
                                          "rule",   "true",    "false"};
  if (s.empty()) return false;
  auto alpha = [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
  };
  if (!alpha(s[0])) return false;
  for (char c : s)
    if (!alpha(c) && !(c >= '0' && c <= '9')) return false;
  for (const char* word : kReserved)
    if (s == word) return false;
  return true;
}

}  // namespace

Schema::Schema(std::vector<FeatureDecl> features,
               std::vector<std::string> classes)
    : features_(std::move(features)), classes_(std::move(classes)) {
  if (features_.empty()) throw ValidationError("schema declares no features");
  if (classes_.size() < 2)
    throw ValidationError("schema must declare at least two classes");
  value_lookup_.resize(features_.size());
  for (std::size_t f = 0; f < features_.size(); ++f) {
    const auto& decl = features_[f];
    if (!is_identifier(decl.name))
      throw ValidationError("feature name '" + decl.name +
                            "' is not a valid identifier");
    if (!feature_lookup_.emplace(decl.name, f).second)
      throw ValidationError("duplicate feature " + decl.name);
    if (decl.domain.size() < 2)
      throw ValidationError("feature " + decl.name +
                            " needs a domain of at least two values");
    for (std::size_t v = 0; v < decl.domain.size(); ++v) {
      if (decl.domain[v].empty())
        throw ValidationError("empty value in domain of " + decl.name);
      if (!value_lookup_[f].emplace(decl.domain[v], v).second)
        throw ValidationError("duplicate value " + decl.domain[v] +
                              " in domain of " + decl.name);
    }
  }
  for (std::size_t c = 0; c < classes_.size(); ++c) {
    if (!is_identifier(classes_[c]))
      throw ValidationError("class name '" + classes_[c] +
                            "' is not a valid identifier");
    if (!class_lookup_.emplace(classes_[c], c).second)
      throw ValidationError("duplicate class " + classes_[c]);
    if (feature_lookup_.count(classes_[c]))
      throw ValidationError("class " + classes_[c] +
                            " collides with a feature name");
  }
  (void)universe_size();
}

std::optional<std::size_t> Schema::feature_index(const std::string& name) const {
  auto it = feature_lookup_.find(name);
  if (it == feature_lookup_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> Schema::value_index(std::size_t feature,
                                               const std::string& value) const {
  if (feature >= value_lookup_.size()) return std::nullopt;
  auto it = value_lookup_[feature].find(value);
  if (it == value_lookup_[feature].end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> Schema::class_index(const std::string& name) const {
  auto it = class_lookup_.find(name);
  if (it == class_lookup_.end()) return std::nullopt;
  return it->second;
}

std::uint64_t Schema::universe_size() const {
  constexpr std::uint64_t kMax = std::uint64_t{1} << 63;
  std::uint64_t size = 1;
  for (const auto& decl : features_) {
    const std::uint64_t d = decl.domain.size();
    if (size > kMax / d) throw LimitError("universe size exceeds 2^63");
    size *= d;
  }
  return size;
}

bool Schema::same_features(const Schema& other) const {
  for (std::size_t f = 0; f < features_.size(); ++f) {
    if (features_[f].name != other.features_[f].name ||
        features_[f].domain != other.features_[f].domain)
      return false;
  }
  return true;
}

}  // namespace xkb
