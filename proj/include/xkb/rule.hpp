#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "xkb/formula.hpp"
#include "xkb/schema.hpp"

namespace xkb {

enum class Origin { kData, kExplanation, kFeedback, kDerived };

std::string_view to_string(Origin origin);
std::optional<Origin> origin_from_string(std::string_view text);

/// body => head. Identity for set membership is the canonical (body, head)
/// pair; id and origin are bookkeeping only.
struct Rule {
  std::string id;
  FeatureFormula body;
  ClassFormula head;
  Origin origin = Origin::kExplanation;
};

Rule canonicalize(const Rule& rule);

/// Canonical rendering of `body => head`, used as the identity key.
std::string rule_key(const Rule& rule);

inline bool same_rule(const Rule& a, const Rule& b) {
  return rule_key(a) == rule_key(b);
}

/// Body is a conjunction of atoms mentioning each schema feature exactly once
/// and head is a single positive class atom.
bool is_instance_rule(const Schema& schema, const Rule& rule);

/// Every atom references a declared feature/value/class. Throws
/// ValidationError naming the first unknown symbol.
void check_symbols(const Schema& schema, const Rule& rule);

struct Document {
  Schema schema;
  std::vector<Rule> rules;
};

/// `data r1: f1=1 & f2=1 & f3=0 => c1;` Feedback and derived rules render
/// with the `rule` keyword.
std::string render(const Rule& rule);
std::string render(const Schema& schema);
std::string render(const Document& doc);

}  // namespace xkb
