#include "xkb/parser.hpp"

#include <cstdint>
#include <cstdio>
#include <set>
#include <unordered_set>

#include "xkb/error.hpp"

namespace xkb {

namespace {

std::string position_prefix(std::size_t line, std::size_t column) {
  return std::to_string(line) + ":" + std::to_string(column) + ": ";
}

}  // namespace

ParseError::ParseError(std::string message, std::size_t line,
                       std::size_t column, std::vector<std::string> expected)
    : Error(position_prefix(line, column) + message),
      detail_(std::move(message)),
      line_(line),
      column_(column),
      expected_(std::move(expected)) {}

namespace {

enum class TokenKind { kWord, kString, kPunct, kEnd };

struct Token {
  TokenKind kind;
  std::string text;
  std::size_t line;
  std::size_t column;
};

bool is_word_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
         (c >= '0' && c <= '9') || c == '_' || c == '.' || c == '-' ||
         c == '+';
}

bool is_identifier(const std::string& s) {
  if (s.empty()) return false;
  const char c0 = s[0];
  if (!((c0 >= 'a' && c0 <= 'z') || (c0 >= 'A' && c0 <= 'Z') || c0 == '_'))
    return false;
  for (char c : s) {
    if (!((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
          (c >= '0' && c <= '9') || c == '_'))
      return false;
  }
  return true;
}

const std::unordered_set<std::string>& keywords() {
  static const std::unordered_set<std::string> kWords = {
      "schema", "feature", "classes", "data", "rule", "true", "false"};
  return kWords;
}

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> out;
  std::size_t line = 1, column = 1, i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k, ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
  };
  while (i < text.size()) {
    const char c = text[i];
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
      advance(1);
      continue;
    }
    if (c == '#' || (c == '/' && i + 1 < text.size() && text[i + 1] == '/')) {
      while (i < text.size() && text[i] != '\n') advance(1);
      continue;
    }
    const std::size_t tl = line, tc = column;
    if (c == '=' && i + 1 < text.size() && text[i + 1] == '>') {
      out.push_back({TokenKind::kPunct, "=>", tl, tc});
      advance(2);
      continue;
    }
    if (std::string_view("{}:;,=!&|()").find(c) != std::string_view::npos) {
      out.push_back({TokenKind::kPunct, std::string(1, c), tl, tc});
      advance(1);
      continue;
    }
    if (c == '"') {
      std::string value;
      advance(1);
      bool closed = false;
      while (i < text.size()) {
        if (text[i] == '\\' && i + 1 < text.size()) {
          value += text[i + 1];
          advance(2);
        } else if (text[i] == '"') {
          advance(1);
          closed = true;
          break;
        } else if (text[i] == '\n') {
          break;
        } else {
          value += text[i];
          advance(1);
        }
      }
      if (!closed) throw ParseError("unterminated string literal", tl, tc);
      out.push_back({TokenKind::kString, std::move(value), tl, tc});
      continue;
    }
    if (is_word_char(c)) {
      std::size_t j = i;
      while (j < text.size() && is_word_char(text[j])) ++j;
      out.push_back({TokenKind::kWord, std::string(text.substr(i, j - i)), tl, tc});
      advance(j - i);
      continue;
    }
    throw ParseError(std::string("unexpected character '") + c + "'", tl, tc);
  }
  out.push_back({TokenKind::kEnd, "", line, column});
  return out;
}

std::string describe(const Token& t) {
  switch (t.kind) {
    case TokenKind::kEnd:
      return "end of input";
    case TokenKind::kString:
      return "string \"" + t.text + "\"";
    default:
      return "'" + t.text + "'";
  }
}

class Parser {
 public:
  explicit Parser(std::string_view text) : tokens_(tokenize(text)) {}

  Document document() {
    Document doc;
    doc.schema = schema_block();
    std::set<std::string> ids;
    while (peek().kind != TokenKind::kEnd) {
      const Token& start = peek();
      Rule r = statement(doc.schema);
      if (!ids.insert(r.id).second)
        throw ParseError("duplicate rule id " + r.id, start.line, start.column);
      doc.rules.push_back(std::move(r));
    }
    return doc;
  }

  Rule feedback_rule(const Schema& schema) {
    Rule r;
    r.origin = Origin::kFeedback;
    if (peek().kind == TokenKind::kWord && peek(1).kind == TokenKind::kPunct &&
        peek(1).text == ":") {
      r.id = identifier("rule id");
      expect(":");
    }
    r.body = feature_or(schema);
    expect("=>");
    r.head = class_or(schema);
    if (is_punct(";")) next();
    if (peek().kind != TokenKind::kEnd) fail({"end of input"});
    if (r.id.empty()) r.id = stable_id(r);
    return r;
  }

 private:
  const Token& peek(std::size_t ahead = 0) const {
    return tokens_[std::min(pos_ + ahead, tokens_.size() - 1)];
  }
  const Token& next() { return tokens_[std::min(pos_++, tokens_.size() - 1)]; }

  bool is_punct(std::string_view p) const {
    return peek().kind == TokenKind::kPunct && peek().text == p;
  }
  bool is_keyword(std::string_view k) const {
    return peek().kind == TokenKind::kWord && peek().text == k;
  }

  [[noreturn]] void fail(std::vector<std::string> expected) const {
    const Token& t = peek();
    std::string msg = "expected ";
    for (std::size_t i = 0; i < expected.size(); ++i) {
      if (i) msg += i + 1 == expected.size() ? " or " : ", ";
      msg += expected[i];
    }
    msg += ", got " + describe(t);
    throw ParseError(msg, t.line, t.column, std::move(expected));
  }

  void expect(std::string_view p) {
    if (!is_punct(p)) fail({"'" + std::string(p) + "'"});
    next();
  }
  void expect_keyword(std::string_view k) {
    if (!is_keyword(k)) fail({"'" + std::string(k) + "'"});
    next();
  }

  std::string identifier(const char* what) {
    const Token& t = peek();
    if (t.kind != TokenKind::kWord || !is_identifier(t.text) ||
        keywords().count(t.text))
      fail({what});
    return next().text;
  }

  std::string value() {
    const Token& t = peek();
    if (t.kind != TokenKind::kWord && t.kind != TokenKind::kString)
      fail({"value"});
    return next().text;
  }

  Schema schema_block() {
    expect_keyword("schema");
    expect("{");
    std::vector<FeatureDecl> features;
    while (is_keyword("feature")) {
      next();
      FeatureDecl decl;
      decl.name = identifier("feature name");
      expect(":");
      expect("{");
      decl.domain.push_back(value());
      while (is_punct(",")) {
        next();
        decl.domain.push_back(value());
      }
      expect("}");
      expect(";");
      features.push_back(std::move(decl));
    }
    if (features.empty()) fail({"'feature'"});
    const Token& cls_tok = peek();
    if (!is_keyword("classes")) fail({"'feature'", "'classes'"});
    next();
    expect("{");
    std::vector<std::string> classes;
    classes.push_back(identifier("class name"));
    while (is_punct(",")) {
      next();
      classes.push_back(identifier("class name"));
    }
    expect("}");
    expect(";");
    expect("}");
    try {
      return Schema(std::move(features), std::move(classes));
    } catch (const ValidationError& e) {
      throw ParseError(e.what(), cls_tok.line, cls_tok.column);
    }
  }

  Rule statement(const Schema& schema) {
    Rule r;
    const Token& start = peek();
    if (is_keyword("data")) {
      r.origin = Origin::kData;
    } else if (is_keyword("rule")) {
      r.origin = Origin::kExplanation;
    } else {
      fail({"'data'", "'rule'", "end of input"});
    }
    next();
    r.id = identifier("rule id");
    expect(":");
    r.body = feature_or(schema);
    expect("=>");
    const Token& head_tok = peek();
    r.head = class_or(schema);
    expect(";");
    if (r.origin == Origin::kData) check_data_rule(schema, r, start, head_tok);
    return r;
  }

  void check_data_rule(const Schema& schema, const Rule& r, const Token& start,
                       const Token& head_tok) const {
    if (!r.head.is_atom())
      throw ParseError("data rule " + r.id +
                           " must have a single positive class atom as head",
                       head_tok.line, head_tok.column);
    std::vector<const FeatureFormula*> atoms;
    if (r.body.is_atom()) {
      atoms.push_back(&r.body);
    } else if (r.body.kind() == NodeKind::kAnd) {
      for (const auto& c : r.body.children()) {
        if (!c.is_atom())
          throw ParseError("data rule " + r.id +
                               " body must be a conjunction of feature atoms",
                           start.line, start.column);
        atoms.push_back(&c);
      }
    } else {
      throw ParseError("data rule " + r.id +
                           " body must be a conjunction of feature atoms",
                       start.line, start.column);
    }
    std::set<std::string> seen;
    for (const auto* a : atoms) {
      if (!seen.insert(a->atom().feature).second)
        throw ParseError("feature " + a->atom().feature +
                             " repeated in data rule " + r.id,
                         start.line, start.column);
    }
    for (const auto& f : schema.features()) {
      if (!seen.count(f.name))
        throw ParseError("data rule " + r.id + " does not assign feature " +
                             f.name,
                         start.line, start.column);
    }
  }

  FeatureFormula feature_or(const Schema& schema) {
    std::vector<FeatureFormula> parts;
    parts.push_back(feature_and(schema));
    while (is_punct("|")) {
      next();
      parts.push_back(feature_and(schema));
    }
    return FeatureFormula::disj(std::move(parts));
  }

  FeatureFormula feature_and(const Schema& schema) {
    std::vector<FeatureFormula> parts;
    parts.push_back(feature_neg(schema));
    while (is_punct("&")) {
      next();
      parts.push_back(feature_neg(schema));
    }
    return FeatureFormula::conj(std::move(parts));
  }

  FeatureFormula feature_neg(const Schema& schema) {
    if (is_punct("!")) {
      next();
      return FeatureFormula::negate(feature_neg(schema));
    }
    if (is_punct("(")) {
      next();
      FeatureFormula inner = feature_or(schema);
      expect(")");
      return inner;
    }
    if (is_keyword("true")) {
      next();
      return FeatureFormula::top();
    }
    if (is_keyword("false")) {
      next();
      return FeatureFormula::bottom();
    }
    const Token& t = peek();
    if (t.kind != TokenKind::kWord || !is_identifier(t.text) ||
        keywords().count(t.text))
      fail({"feature atom", "'!'", "'('", "'true'", "'false'"});
    next();
    auto feature = schema.feature_index(t.text);
    if (!feature) throw ParseError("unknown feature " + t.text, t.line, t.column);
    expect("=");
    const Token& vt = peek();
    std::string v = value();
    if (!schema.value_index(*feature, v))
      throw ParseError("unknown value " + v + " for feature " + t.text,
                       vt.line, vt.column);
    return feature_eq(t.text, std::move(v));
  }

  ClassFormula class_or(const Schema& schema) {
    std::vector<ClassFormula> parts;
    parts.push_back(class_and(schema));
    while (is_punct("|")) {
      next();
      parts.push_back(class_and(schema));
    }
    return ClassFormula::disj(std::move(parts));
  }

  ClassFormula class_and(const Schema& schema) {
    std::vector<ClassFormula> parts;
    parts.push_back(class_neg(schema));
    while (is_punct("&")) {
      next();
      parts.push_back(class_neg(schema));
    }
    return ClassFormula::conj(std::move(parts));
  }

  ClassFormula class_neg(const Schema& schema) {
    if (is_punct("!")) {
      next();
      return ClassFormula::negate(class_neg(schema));
    }
    if (is_punct("(")) {
      next();
      ClassFormula inner = class_or(schema);
      expect(")");
      return inner;
    }
    if (is_keyword("true")) {
      next();
      return ClassFormula::top();
    }
    if (is_keyword("false")) {
      next();
      return ClassFormula::bottom();
    }
    const Token& t = peek();
    if (t.kind != TokenKind::kWord || !is_identifier(t.text) ||
        keywords().count(t.text))
      fail({"class atom", "'!'", "'('", "'true'", "'false'"});
    next();
    if (!schema.class_index(t.text))
      throw ParseError("unknown class " + t.text, t.line, t.column);
    return class_is(t.text);
  }

  static std::string stable_id(const Rule& r) {
    std::uint32_t hash = 2166136261u;
    for (unsigned char c : rule_key(r)) {
      hash ^= c;
      hash *= 16777619u;
    }
    char buf[16];
    std::snprintf(buf, sizeof buf, "fb_%08x", hash);
    return buf;
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
};

}  // namespace

Document parse_document(std::string_view text) { return Parser(text).document(); }

Rule parse_rule(const Schema& schema, std::string_view text) {
  return Parser(text).feedback_rule(schema);
}

}  // namespace xkb
