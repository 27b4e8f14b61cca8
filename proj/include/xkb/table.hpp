#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "xkb/schema.hpp"

namespace xkb {

/// Total assignment: one value index per schema feature, in schema order.
struct DataPoint {
  std::vector<std::uint32_t> values;
  auto operator<=>(const DataPoint&) const = default;
};

/// `(f1=1, f2=1, f3=0)`
std::string render(const Schema& schema, const DataPoint& point);

/// Builds a point from (feature, value) strings in schema order. Throws
/// ValidationError on unknown values or wrong arity.
DataPoint make_point(const Schema& schema, const std::vector<std::string>& values);

/// Known data points D and the classifier's label M(x) for each.
class ClassifierTable {
 public:
  struct Row {
    DataPoint point;
    std::size_t label;  // class index
  };

  ClassifierTable() = default;
  /// Deduplicates identical rows; throws ValidationError when the same point
  /// carries two different labels or a row does not fit the schema.
  ClassifierTable(Schema schema, std::vector<Row> rows);

  const Schema& schema() const { return schema_; }
  const std::vector<Row>& rows() const { return rows_; }
  std::size_t size() const { return rows_.size(); }
  bool empty() const { return rows_.empty(); }

  std::optional<std::size_t> label(const DataPoint& point) const;

 private:
  Schema schema_;
  std::vector<Row> rows_;
  std::map<DataPoint, std::size_t> index_;
};

}  // namespace xkb
