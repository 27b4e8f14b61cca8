#include "xkb/generators.hpp"

#include <set>

#include "xkb/semantics.hpp"

namespace xkb {

std::size_t InstanceGenerator::uniform(std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng_);
}

bool InstanceGenerator::coin(double p) {
  return std::bernoulli_distribution(p)(rng_);
}

Schema InstanceGenerator::schema(const SchemaShape& shape) {
  static const char* const kValueNames[] = {"0", "1", "2", "lo", "mid", "hi"};
  const std::size_t nf = uniform(shape.min_features, shape.max_features);
  std::vector<FeatureDecl> features;
  for (std::size_t f = 0; f < nf; ++f) {
    FeatureDecl d{"f" + std::to_string(f + 1), {}};
    const std::size_t dom = uniform(2, std::max<std::size_t>(2, shape.max_domain));
    const bool words = coin(0.2) && dom <= 3;
    for (std::size_t v = 0; v < dom; ++v)
      d.domain.push_back(words ? kValueNames[3 + v] : std::to_string(v));
    features.push_back(std::move(d));
  }
  std::vector<std::string> classes;
  const std::size_t nc = uniform(2, std::max<std::size_t>(2, shape.max_classes));
  for (std::size_t c = 0; c < nc; ++c) classes.push_back("c" + std::to_string(c + 1));
  return Schema(std::move(features), std::move(classes));
}

FeatureFormula InstanceGenerator::feature_formula(const Schema& schema,
                                                  int depth) {
  const std::size_t pick = uniform(0, depth <= 0 ? 5 : 9);
  if (pick <= 4 || depth <= 0) {
    if (pick == 5 && coin(0.5)) return coin(0.5) ? FeatureFormula::top()
                                                 : FeatureFormula::bottom();
    const std::size_t f = uniform(0, schema.feature_count() - 1);
    const auto& decl = schema.features()[f];
    return feature_eq(decl.name, decl.domain[uniform(0, decl.domain.size() - 1)]);
  }
  if (pick == 5) return !feature_formula(schema, depth - 1);
  std::vector<FeatureFormula> parts;
  const std::size_t n = uniform(2, 3);
  for (std::size_t i = 0; i < n; ++i) parts.push_back(feature_formula(schema, depth - 1));
  return pick <= 7 ? FeatureFormula::conj(std::move(parts))
                   : FeatureFormula::disj(std::move(parts));
}

ClassFormula InstanceGenerator::class_formula(const Schema& schema, int depth) {
  const std::size_t pick = uniform(0, depth <= 0 ? 4 : 8);
  if (pick <= 3 || depth <= 0) {
    return class_is(schema.classes()[uniform(0, schema.class_count() - 1)]);
  }
  if (pick <= 5) return !class_formula(schema, depth - 1);
  std::vector<ClassFormula> parts;
  const std::size_t n = uniform(2, 3);
  for (std::size_t i = 0; i < n; ++i) parts.push_back(class_formula(schema, depth - 1));
  return pick == 6 ? ClassFormula::conj(std::move(parts))
                   : ClassFormula::disj(std::move(parts));
}

Rule InstanceGenerator::rule(const Schema& schema, std::string id,
                             Origin origin, int depth) {
  Rule r;
  r.id = std::move(id);
  r.origin = origin;
  r.body = feature_formula(schema, depth);
  for (int attempt = 0;; ++attempt) {
    r.head = class_formula(schema, attempt < 8 ? 1 : 0);
    if (!class_extent(r.head, schema).empty()) break;
  }
  return r;
}

Rule InstanceGenerator::instance_rule(const Schema& schema,
                                      const DataPoint& point, std::size_t label,
                                      std::string id, Origin origin) {
  std::vector<FeatureFormula> atoms;
  for (std::size_t f = 0; f < schema.feature_count(); ++f)
    atoms.push_back(feature_eq(schema.features()[f].name,
                               schema.features()[f].domain[point.values[f]]));
  return Rule{std::move(id), FeatureFormula::conj(std::move(atoms)),
              class_is(schema.classes()[label]), origin};
}

DataPoint InstanceGenerator::point(const Schema& schema) {
  DataPoint p;
  for (std::size_t f = 0; f < schema.feature_count(); ++f)
    p.values.push_back(static_cast<std::uint32_t>(uniform(0, schema.domain_size(f) - 1)));
  return p;
}

ClassifierTable InstanceGenerator::table(const Schema& schema,
                                         std::size_t max_rows) {
  const std::uint64_t universe = schema.universe_size();
  const std::size_t target =
      uniform(0, static_cast<std::size_t>(std::min<std::uint64_t>(max_rows, universe)));
  std::set<DataPoint> seen;
  std::vector<ClassifierTable::Row> rows;
  for (std::size_t attempts = 0; rows.size() < target && attempts < 50 * (target + 1);
       ++attempts) {
    DataPoint p = point(schema);
    if (!seen.insert(p).second) continue;
    rows.push_back({std::move(p), uniform(0, schema.class_count() - 1)});
  }
  return ClassifierTable(schema, std::move(rows));
}

Document InstanceGenerator::document(const SchemaShape& shape, std::size_t rules) {
  Document doc{schema(shape), {}};
  for (std::size_t i = 0; i < rules; ++i) {
    const std::string id = "r" + std::to_string(i + 1);
    if (coin(0.3)) {
      doc.rules.push_back(instance_rule(doc.schema, point(doc.schema),
                                        uniform(0, doc.schema.class_count() - 1),
                                        id, Origin::kData));
    } else {
      doc.rules.push_back(rule(doc.schema, id, Origin::kExplanation, 3));
    }
  }
  return doc;
}

}  // namespace xkb
