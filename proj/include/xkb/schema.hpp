#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace xkb {

struct FeatureDecl {
  std::string name;
  std::vector<std::string> domain;
};

/// Feature alphabet with finite domains plus the class alphabet.
///
/// Construction validates uniqueness and non-emptiness; once built a Schema
/// is immutable and lookups are O(1).
class Schema {
 public:
  Schema() = default;
  Schema(std::vector<FeatureDecl> features, std::vector<std::string> classes);

  const std::vector<FeatureDecl>& features() const { return features_; }
  const std::vector<std::string>& classes() const { return classes_; }
  std::size_t feature_count() const { return features_.size(); }
  std::size_t class_count() const { return classes_.size(); }
  std::size_t domain_size(std::size_t feature) const {
    return features_[feature].domain.size();
  }

  std::optional<std::size_t> feature_index(const std::string& name) const;
  std::optional<std::size_t> value_index(std::size_t feature,
                                         const std::string& value) const;
  std::optional<std::size_t> class_index(const std::string& name) const;

  /// |V|, the product of all domain sizes. Throws LimitError above 2^63.
  std::uint64_t universe_size() const;

  bool operator==(const Schema& other) const {
    return features_.size() == other.features_.size() &&
           classes_ == other.classes_ && same_features(other);
  }

 private:
  bool same_features(const Schema& other) const;

  std::vector<FeatureDecl> features_;
  std::vector<std::string> classes_;
  std::unordered_map<std::string, std::size_t> feature_lookup_;
  std::vector<std::unordered_map<std::string, std::size_t>> value_lookup_;
  std::unordered_map<std::string, std::size_t> class_lookup_;
};

}  // namespace xkb
