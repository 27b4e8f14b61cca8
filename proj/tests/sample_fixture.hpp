#pragma once

#include <algorithm>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "xkb/parser.hpp"
#include "xkb/semantics.hpp"

namespace xkb::testing {

inline constexpr const char* kSampleKb = R"(schema {
  feature f1: {0, 1};
  feature f2: {0, 1};
  feature f3: {0, 1};
  classes {c1, c2, c3};
}
data r1: f1=1 & f2=1 & f3=0 => c1;
data r2: f1=0 & f2=1 & f3=1 => c2;
data r3: f1=1 & f2=0 & f3=1 => c2;
data r4: f1=1 & f2=1 & f3=1 => c1;
data r5: f1=1 & f2=0 & f3=0 => c3;
data r6: f1=0 & f2=1 & f3=0 => c1;
rule rx: f1=1 & f2=1 => c1;
rule ry: f2=1 | f3=1 => !c3;
)";

inline constexpr const char* kSampleCsv =
    "f1,f2,f3,class\n"
    "1,1,0,c1\n"
    "0,1,1,c2\n"
    "1,0,1,c2\n"
    "1,1,1,c1\n"
    "1,0,0,c3\n"
    "0,1,0,c1\n";

/// The worked example: schema, table x1..x6, rules r1..r6, rx, ry plus the
/// extra rules rz and the feedback rules rp, rq, rr.
struct Sample {
  Document doc = parse_document(kSampleKb);
  Schema schema = doc.schema;
  std::map<std::string, Rule> rules;
  std::shared_ptr<const ClassifierTable> table;
  std::vector<DataPoint> x;  // x[1..6]

  Sample() {
    for (const auto& r : doc.rules) rules[r.id] = r;
    add("rz: f1=1 => c1", Origin::kExplanation);
    add("rp: f1=0 & f2=0 & f3=1 => c3", Origin::kFeedback);
    add("rq: f1=1 & f2=1 & f3=1 => c2", Origin::kFeedback);
    add("rr: f1=1 & f2=1 => !c1", Origin::kFeedback);
    const std::vector<std::pair<std::vector<std::string>, std::size_t>> rows = {
        {{"1", "1", "0"}, 0}, {{"0", "1", "1"}, 1}, {{"1", "0", "1"}, 1},
        {{"1", "1", "1"}, 0}, {{"1", "0", "0"}, 2}, {{"0", "1", "0"}, 0}};
    std::vector<ClassifierTable::Row> table_rows;
    x.push_back({});
    for (const auto& [values, label] : rows) {
      x.push_back(make_point(schema, values));
      table_rows.push_back({x.back(), label});
    }
    table = std::make_shared<const ClassifierTable>(schema, table_rows);
  }

  void add(const std::string& text, Origin origin) {
    Rule r = parse_rule(schema, text);
    r.origin = origin;
    rules[r.id] = r;
  }

  const Rule& operator[](const std::string& id) const { return rules.at(id); }

  std::vector<Rule> set(std::initializer_list<const char*> ids) const {
    std::vector<Rule> out;
    for (const char* id : ids) out.push_back(rules.at(id));
    return out;
  }

  DataPoint point(const std::string& f1, const std::string& f2,
                  const std::string& f3) const {
    return make_point(schema, {f1, f2, f3});
  }

  Scope full() const { return Scope::full_universe(schema); }
  Scope dataset() const { return Scope::dataset(table); }
};

inline std::set<std::string> ids_of(const std::vector<Rule>& rules) {
  std::set<std::string> out;
  for (const auto& r : rules) out.insert(r.id);
  return out;
}

}  // namespace xkb::testing
