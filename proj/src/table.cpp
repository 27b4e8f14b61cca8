#include "xkb/table.hpp"

#include "xkb/error.hpp"

namespace xkb {

std::string render(const Schema& schema, const DataPoint& point) {
  std::string out = "(";
  for (std::size_t f = 0; f < point.values.size(); ++f) {
    if (f) out += ", ";
    out += schema.features()[f].name + "=" +
           schema.features()[f].domain[point.values[f]];
  }
  return out + ")";
}

DataPoint make_point(const Schema& schema,
                     const std::vector<std::string>& values) {
  if (values.size() != schema.feature_count())
    throw ValidationError("expected " + std::to_string(schema.feature_count()) +
                          " feature values, got " +
                          std::to_string(values.size()));
  DataPoint p;
  p.values.reserve(values.size());
  for (std::size_t f = 0; f < values.size(); ++f) {
    auto v = schema.value_index(f, values[f]);
    if (!v)
      throw ValidationError("undeclared value " + values[f] + " for feature " +
                            schema.features()[f].name);
    p.values.push_back(static_cast<std::uint32_t>(*v));
  }
  return p;
}

ClassifierTable::ClassifierTable(Schema schema, std::vector<Row> rows)
    : schema_(std::move(schema)) {
  for (auto& row : rows) {
    if (row.point.values.size() != schema_.feature_count())
      throw ValidationError("row arity does not match schema");
    for (std::size_t f = 0; f < row.point.values.size(); ++f) {
      if (row.point.values[f] >= schema_.domain_size(f))
        throw ValidationError("row value out of domain for feature " +
                              schema_.features()[f].name);
    }
    if (row.label >= schema_.class_count())
      throw ValidationError("row label is not a declared class");
    auto [it, inserted] = index_.emplace(row.point, row.label);
    if (!inserted) {
      if (it->second != row.label)
        throw ValidationError("conflicting labels for point " +
                              render(schema_, row.point) + ": " +
                              schema_.classes()[it->second] + " and " +
                              schema_.classes()[row.label]);
      continue;
    }
    rows_.push_back(std::move(row));
  }
}

std::optional<std::size_t> ClassifierTable::label(const DataPoint& point) const {
  auto it = index_.find(point);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

}  // namespace xkb
