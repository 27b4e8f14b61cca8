#include <gtest/gtest.h>

#include "sample_fixture.hpp"
#include "xkb/error.hpp"
#include "xkb/generators.hpp"
#include "xkb/parser.hpp"

namespace xkb {
namespace {

using testing::kSampleKb;

const char* kSchemaOnly = R"(schema {
  feature f1: {0, 1};
  feature f2: {0, 1};
  feature f3: {0, 1};
  classes {c1, c2, c3};
}
)";

std::string with_schema(const std::string& stmts) { return kSchemaOnly + stmts; }

ParseError parse_error_of(const std::string& text) {
  try {
    parse_document(text);
  } catch (const ParseError& e) {
    return e;
  }
  ADD_FAILURE() << "expected a parse error for:\n" << text;
  return ParseError("none", 0, 0);
}

TEST(ParseDocumentTest, SampleInstanceRule) {
  Document doc = parse_document(with_schema("data r1: f1=1 & f2=1 & f3=0 => c1;\n"));
  ASSERT_EQ(doc.rules.size(), 1u);
  const Rule& r1 = doc.rules[0];
  EXPECT_EQ(r1.id, "r1");
  EXPECT_EQ(r1.origin, Origin::kData);
  EXPECT_TRUE(is_instance_rule(doc.schema, r1));
  ASSERT_EQ(r1.body.kind(), NodeKind::kAnd);
  EXPECT_EQ(r1.body.children().size(), 3u);
  EXPECT_EQ(r1.head, class_is("c1"));
}

TEST(ParseDocumentTest, NegatedHead) {
  Document doc = parse_document(with_schema("rule ry: f2=1 | f3=1 => !c3;\n"));
  const Rule& ry = doc.rules.at(0);
  EXPECT_EQ(ry.origin, Origin::kExplanation);
  EXPECT_EQ(ry.head, !class_is("c3"));
  EXPECT_EQ(ry.body, feature_eq("f2", "1") | feature_eq("f3", "1"));
  EXPECT_FALSE(is_instance_rule(doc.schema, ry));
}

TEST(ParseDocumentTest, Precedence) {
  Document doc = parse_document(
      with_schema("rule a: !f1=1 & f2=0 | f3=1 => c1 | c2 & !c3;\n"));
  const Rule& a = doc.rules.at(0);
  EXPECT_EQ(a.body, (!feature_eq("f1", "1") & feature_eq("f2", "0")) |
                        feature_eq("f3", "1"));
  EXPECT_EQ(a.head, class_is("c1") | (class_is("c2") & !class_is("c3")));
}

TEST(ParseDocumentTest, UnknownFeature) {
  ParseError e = parse_error_of(with_schema("rule bad: f9=1 => c1;\n"));
  EXPECT_EQ(e.detail(), "unknown feature f9");
  EXPECT_EQ(e.line(), 7u);
  EXPECT_EQ(e.column(), 11u);
}

TEST(ParseDocumentTest, UnknownValueAndClass) {
  EXPECT_EQ(parse_error_of(with_schema("rule a: f1=7 => c1;")).detail(),
            "unknown value 7 for feature f1");
  EXPECT_EQ(parse_error_of(with_schema("rule a: f1=1 => c9;")).detail(),
            "unknown class c9");
}

TEST(ParseDocumentTest, DuplicateId) {
  ParseError e = parse_error_of(
      with_schema("rule a: f1=1 => c1;\nrule a: f1=0 => c2;\n"));
  EXPECT_EQ(e.detail(), "duplicate rule id a");
  EXPECT_EQ(e.line(), 8u);
}

TEST(ParseDocumentTest, DataRuleShape) {
  EXPECT_NE(parse_error_of(with_schema("data d: f1=1 & f1=0 & f3=0 => c1;"))
                .detail()
                .find("repeated"),
            std::string::npos);
  EXPECT_NE(parse_error_of(with_schema("data d: f1=1 & f2=1 & f3=0 => !c1;"))
                .detail()
                .find("single positive class atom"),
            std::string::npos);
  EXPECT_NE(parse_error_of(with_schema("data d: f1=1 & f2=1 => c1;"))
                .detail()
                .find("does not assign feature f3"),
            std::string::npos);
  EXPECT_NE(parse_error_of(with_schema("data d: f1=1 | f2=1 => c1;"))
                .detail()
                .find("conjunction"),
            std::string::npos);
}

TEST(ParseDocumentTest, SyntaxErrorReportsExpectedTokens) {
  ParseError e = parse_error_of(with_schema("rule a: f1=1 c1;"));
  EXPECT_EQ(e.line(), 7u);
  EXPECT_EQ(e.column(), 14u);
  EXPECT_NE(std::find(e.expected().begin(), e.expected().end(), "'=>'"),
            e.expected().end());
}

TEST(ParseDocumentTest, SchemaErrors) {
  EXPECT_THROW(parse_document("schema { classes {c1, c2}; }"), ParseError);
  EXPECT_THROW(parse_document("schema { feature f: {0}; classes {a, b}; }"),
               ParseError);
  EXPECT_THROW(parse_document("schema { feature f: {0, 0}; classes {a, b}; }"),
               ParseError);
  EXPECT_THROW(parse_document("schema { feature f: {0, 1}; classes {a, a}; }"),
               ParseError);
  EXPECT_THROW(parse_document(""), ParseError);
}

TEST(ParseDocumentTest, QuotedValues) {
  Document doc = parse_document(R"(schema {
  feature color: {"dark red", plain, "with \"quote\""};
  feature n: {0, 1};
  classes {yes, no};
}
rule q: color="dark red" | color="with \"quote\"" => yes;
)");
  EXPECT_EQ(doc.rules[0].body.children()[0].atom().value, "dark red");
  const std::string text = render(doc);
  Document again = parse_document(text);
  EXPECT_EQ(render(again), text);
}

TEST(ParseRuleTest, FeedbackRules) {
  testing::Sample sample;
  Rule rp = parse_rule(sample.schema, "f1=0 & f2=0 & f3=1 => c3");
  EXPECT_EQ(rp.origin, Origin::kFeedback);
  EXPECT_EQ(rp.id.rfind("fb_", 0), 0u);
  EXPECT_TRUE(is_instance_rule(sample.schema, rp));
  Rule rr = parse_rule(sample.schema, "f1=1 & f2=1 => !c1");
  EXPECT_EQ(rr.head, !class_is("c1"));
  EXPECT_NE(rr.id, rp.id);
  // Stable ids: same rule text, same id.
  EXPECT_EQ(parse_rule(sample.schema, "f2=1 & f1=1 => !c1").id, rr.id);
  EXPECT_EQ(parse_rule(sample.schema, "mine: f1=1 => c1;").id, "mine");
}

TEST(ParseRuleTest, Errors) {
  testing::Sample sample;
  EXPECT_THROW(parse_rule(sample.schema, ""), ParseError);
  EXPECT_THROW(parse_rule(sample.schema, "f9=1 => c1"), ParseError);
  EXPECT_THROW(parse_rule(sample.schema, "f1=1 => c1; extra"), ParseError);
}

TEST(CanonicalizeTest, SortsOperands) {
  Rule r{"a", feature_eq("f2", "1") & feature_eq("f1", "1"), class_is("c1")};
  EXPECT_EQ(canonicalize(r).body, feature_eq("f1", "1") & feature_eq("f2", "1"));
}

TEST(CanonicalizeTest, DeMorgan) {
  Rule r{"a", !(feature_eq("f1", "1") | feature_eq("f2", "0")), class_is("c1")};
  EXPECT_EQ(canonicalize(r).body,
            !feature_eq("f1", "1") & !feature_eq("f2", "0"));
  EXPECT_EQ(render(canonicalize(r).body), "!f1=1 & !f2=0");
}

TEST(CanonicalizeTest, KeepsContradictionsAndDeduplicates) {
  const auto a = feature_eq("f1", "1");
  Rule r{"a", a & !a & a, !!class_is("c2")};
  Rule c = canonicalize(r);
  EXPECT_EQ(render(c.body), "!f1=1 & f1=1");
  EXPECT_EQ(c.head, class_is("c2"));
  EXPECT_EQ(render(canonicalize(!FeatureFormula::top())), "false");
}

TEST(CanonicalizeTest, IdentityIgnoresIdAndOrigin) {
  testing::Sample sample;
  Rule a = sample["rx"];
  Rule b{"other", feature_eq("f2", "1") & feature_eq("f1", "1"), class_is("c1"),
         Origin::kFeedback};
  EXPECT_TRUE(same_rule(a, b));
  EXPECT_FALSE(same_rule(a, sample["rz"]));
}

TEST(CanonicalizeTest, IdempotentOnRandomRules) {
  InstanceGenerator gen(20240501);
  for (int i = 0; i < 1000; ++i) {
    Schema s = gen.schema({});
    Rule r = gen.rule(s, "r", Origin::kExplanation, 4);
    Rule once = canonicalize(r);
    Rule twice = canonicalize(once);
    ASSERT_EQ(render(twice), render(once)) << "trial " << i;
    ASSERT_EQ(twice.body, once.body);
    ASSERT_EQ(twice.head, once.head);
  }
}

TEST(RenderTest, InstanceRule) {
  testing::Sample sample;
  EXPECT_EQ(render(sample["r1"]), "data r1: f1=1 & f2=1 & f3=0 => c1;");
  EXPECT_EQ(render(sample["ry"]), "rule ry: f2=1 | f3=1 => !c3;");
}

TEST(RenderTest, SampleDocumentFixpoint) {
  Document doc = parse_document(kSampleKb);
  const std::string once = render(doc);
  const std::string twice = render(parse_document(once));
  EXPECT_EQ(once, twice);
  EXPECT_EQ(once, kSampleKb);
}

TEST(RenderTest, ParenthesesOnlyWhereNeeded) {
  auto a = feature_eq("f1", "1"), b = feature_eq("f2", "1"),
       c = feature_eq("f3", "0");
  EXPECT_EQ(render((a | b) & c), "(f1=1 | f2=1) & f3=0");
  EXPECT_EQ(render(a | (b & c)), "f1=1 | f2=1 & f3=0");
  EXPECT_EQ(render(!(a & b)), "!(f1=1 & f2=1)");
  EXPECT_EQ(render(!!a), "!!f1=1");
}

TEST(RenderTest, RandomDocumentsRoundTrip) {
  InstanceGenerator gen(77);
  for (int i = 0; i < 1000; ++i) {
    Document doc = gen.document({1, 4, 3, 4}, gen.uniform(0, 6));
    const std::string text = render(doc);
    Document back = parse_document(text);
    ASSERT_EQ(back.schema, doc.schema) << text;
    ASSERT_EQ(back.rules.size(), doc.rules.size());
    for (std::size_t k = 0; k < doc.rules.size(); ++k) {
      ASSERT_EQ(back.rules[k].id, doc.rules[k].id);
      ASSERT_EQ(back.rules[k].origin, doc.rules[k].origin);
      ASSERT_EQ(rule_key(back.rules[k]), rule_key(doc.rules[k])) << text;
    }
    ASSERT_EQ(render(parse_document(render(back))), render(back));
  }
}

}  // namespace
}  // namespace xkb
