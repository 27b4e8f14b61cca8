#pragma once

#include <string_view>

#include "xkb/rule.hpp"

namespace xkb {

/// Parses a `.xkb` document: one schema block followed by `data`/`rule`
/// statements. Throws ParseError with a 1-based line/column.
Document parse_document(std::string_view text);

/// Parses a single feedback rule `[id:] body => head [;]` against a schema.
/// Without an explicit id a stable `fb_xxxxxxxx` id is derived from the
/// rule's canonical form. The result has origin kFeedback.
Rule parse_rule(const Schema& schema, std::string_view text);

}  // namespace xkb
