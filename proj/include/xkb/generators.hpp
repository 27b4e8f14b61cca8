#pragma once

#include <cstdint>
#include <random>
#include <string>

#include "xkb/rule.hpp"
#include "xkb/table.hpp"

namespace xkb {

struct SchemaShape {
  std::size_t min_features = 2;
  std::size_t max_features = 4;
  std::size_t max_domain = 3;
  std::size_t max_classes = 3;
};

/// Seeded random schemas, formulas, rules and tables. Same seed, same stream.
class InstanceGenerator {
 public:
  explicit InstanceGenerator(std::uint64_t seed) : rng_(seed) {}

  Schema schema(const SchemaShape& shape);
  FeatureFormula feature_formula(const Schema& schema, int depth);
  ClassFormula class_formula(const Schema& schema, int depth);
  /// Random general rule; head extent is never empty.
  Rule rule(const Schema& schema, std::string id, Origin origin, int depth = 2);
  Rule instance_rule(const Schema& schema, const DataPoint& point,
                     std::size_t label, std::string id, Origin origin);
  DataPoint point(const Schema& schema);
  /// Up to `max_rows` distinct points with random labels.
  ClassifierTable table(const Schema& schema, std::size_t max_rows);
  /// Random document with `rules` statements, a few of them data rules.
  Document document(const SchemaShape& shape, std::size_t rules);

  std::size_t uniform(std::size_t lo, std::size_t hi);  // inclusive
  bool coin(double p = 0.5);
  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

}  // namespace xkb
