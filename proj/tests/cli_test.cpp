#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "oracle.hpp"
#include "sample_fixture.hpp"
#include "xkb/json_io.hpp"
#include "xkb/parser.hpp"

namespace xkb {
namespace {

namespace fs = std::filesystem;

struct Run {
  int code = -1;
  std::string out;
};

Run xkb(const std::string& args) {
  std::string cmd = std::string(XKB_BIN) + " " + args + " 2>/dev/null";
  Run r;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return r;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
  int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string data(const std::string& name) { return std::string(XKB_DATA) + "/" + name; }

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

struct TempFile {
  fs::path path;
  explicit TempFile(const std::string& text) {
    std::random_device rd;
    path = fs::temp_directory_path() / ("xkb_cli_" + std::to_string(rd()) + ".xkb");
    std::ofstream(path) << text;
  }
  ~TempFile() { fs::remove(path); }
  std::string str() const { return path.string(); }
};

TEST(CliTest, SampleKbIsConsistentInFullScope) {
  auto r = xkb("check --kb " + data("paper.xkb") + " --table " + data("paper.csv") +
               " --consistency --scope full --json");
  EXPECT_EQ(r.code, 0);
  auto j = Json::parse(r.out);
  EXPECT_TRUE(j["consistency"]["consistent"].get<bool>());
  EXPECT_EQ(j["consistency"]["conflict_edges"].get<int>(), 0);

  auto text = xkb("check --kb " + data("paper.xkb") + " --table " + data("paper.csv") +
                  " --consistency --scope full");
  EXPECT_EQ(text.code, 0);
  EXPECT_NE(text.out.find("0 conflict edges"), std::string::npos);
}

TEST(CliTest, S3RejectsRrAndLeavesKbUnchanged) {
  auto r = xkb("revise --kb " + data("paper.xkb") + " --table " + data("paper.csv") +
               " --scenario s3 --feedback \"f1=1 & f2=1 => !c1\" --json");
  ASSERT_EQ(r.code, 0);
  auto j = Json::parse(r.out);
  EXPECT_EQ(j["outcome"], "rejected");
  EXPECT_TRUE(j["unchanged"].get<bool>());
  auto original = render(parse_document(read_file(data("paper.xkb"))));
  EXPECT_EQ(j["kb"]["text"], original);

  auto text = xkb("revise --kb " + data("paper.xkb") + " --table " + data("paper.csv") +
                  " --scenario s3 --feedback \"f1=1 & f2=1 => !c1\"");
  EXPECT_EQ(text.code, 0);
  EXPECT_NE(text.out.find("outcome: rejected"), std::string::npos);
  EXPECT_NE(text.out.find("kb: unchanged"), std::string::npos);
}

TEST(CliTest, EnforcementOfSupplementaryPairInDatasetScope) {
  auto r = xkb("check --enforce-left " + data("rules_l.xkb") + " --enforce-right " +
               data("rules_k.xkb") + " --scope dataset --json");
  EXPECT_EQ(r.code, 0);
  EXPECT_TRUE(Json::parse(r.out)["enforcement"]["holds"].get<bool>());

  // Same pair against the full table, and against the full universe where
  // (0,0,1) is covered by ry but by no rule of the left set.
  r = xkb("check --enforce-left " + data("rules_l.xkb") + " --enforce-right " +
          data("rules_k.xkb") + " --scope dataset --table " + data("paper.csv") + " --json");
  EXPECT_EQ(r.code, 0);
  r = xkb("check --enforce-left " + data("rules_l.xkb") + " --enforce-right " +
          data("rules_k.xkb") + " --scope full --json");
  EXPECT_EQ(r.code, 1);
  auto j = Json::parse(r.out)["enforcement"];
  EXPECT_FALSE(j["holds"].get<bool>());
  EXPECT_EQ(j["rule"], "ry");
  EXPECT_EQ(j["counterexample"], (Json{{"f1", "0"}, {"f2", "0"}, {"f3", "1"}}));
}

TEST(CliTest, FindingsExitWithOne) {
  TempFile bad(std::string(testing::kSampleKb) + "rule rz: f1=1 => c1;\n");
  auto r = xkb("check --kb " + bad.str() + " --json");
  EXPECT_EQ(r.code, 1);
  auto edges = Json::parse(r.out)["consistency"]["edges"];
  std::set<std::set<std::string>> got;
  for (const auto& e : edges)
    got.insert({e["rule_a"].get<std::string>(), e["rule_b"].get<std::string>()});
  EXPECT_EQ(got, (std::set<std::set<std::string>>{{"rz", "r3"}, {"rz", "r5"}}));

  r = xkb("check --kb " + bad.str() + " --table " + data("paper.csv") + " --coherence --json");
  EXPECT_EQ(r.code, 1);
  auto rz = Json::parse(r.out)["coherence"]["rz"];
  EXPECT_EQ(rz["numerator"].get<int>(), 2);
  EXPECT_EQ(rz["denominator"].get<int>(), 4);

  r = xkb("check --kb " + data("paper.xkb") + " --table " + data("paper.csv") +
          " --completeness --coherence");
  EXPECT_EQ(r.code, 0);
}

TEST(CliTest, ValidateReportsPositions) {
  EXPECT_EQ(xkb("validate --kb " + data("paper.xkb") + " --table " + data("paper.csv")).code, 0);
  TempFile broken("schema {\n  feature f1: {0, 1};\n  classes {a, b};\n}\nrule q: f1=1 => ;\n");
  auto r = xkb("validate --kb " + broken.str() + " --json");
  EXPECT_EQ(r.code, 1);
  auto j = Json::parse(r.out);
  EXPECT_FALSE(j["ok"].get<bool>());
  EXPECT_EQ(j["line"].get<int>(), 5);
  EXPECT_EQ(j["file"], broken.str());
}

TEST(CliTest, UsageErrorsExitWithTwo) {
  EXPECT_EQ(xkb("").code, 2);
  EXPECT_EQ(xkb("check").code, 2);
  EXPECT_EQ(xkb("check --kb /nonexistent/k.xkb").code, 2);
  EXPECT_EQ(xkb("revise --kb " + data("paper.xkb") + " --scenario s7 --feedback \"f1=1 => c1\"").code, 2);
  EXPECT_EQ(xkb("revise --kb " + data("paper.xkb") + " --feedback \"f9=1 => c1\"").code, 2);
  EXPECT_EQ(xkb("check --kb " + data("rules_k.xkb") + " --coherence --table /nonexistent.csv").code, 2);
  EXPECT_EQ(xkb("--help").code, 0);
}

TEST(CliTest, PostulatesForS1Feedback) {
  auto r = xkb("postulates --kb " + data("paper.xkb") + " --table " + data("paper.csv") +
               " --scenario s1 --feedback \"rq: f1=1 & f2=1 & f3=1 => c2\" --json");
  ASSERT_FALSE(r.out.empty());
  auto j = Json::parse(r.out)["postulates"];
  EXPECT_EQ(j["success"]["status"], "holds");
  EXPECT_EQ(j["relevance"]["status"], "holds");
  EXPECT_EQ(j["consistency-preservation"]["status"], "holds");
  EXPECT_EQ(j["inclusion"]["status"], "fails");
  EXPECT_EQ(r.code, 1);
}

TEST(CliTest, OracleKernelsMatchSubsetSearch) {
  testing::Sample p;
  auto r = xkb("oracle --kb " + data("paper.xkb") +
               " --mode kernels --feedback \"rr: f1=1 & f2=1 => !c1\" --json");
  ASSERT_EQ(r.code, 0);
  auto got = Json::parse(r.out)["sets"].get<std::vector<std::vector<std::string>>>();

  auto k = p.set({"r1", "r2", "r3", "r4", "r5", "r6", "rx", "ry"});
  auto points = oracle::all_points(p.schema);
  std::vector<std::vector<std::string>> expected;
  std::vector<unsigned> bad;
  for (unsigned mask = 0; mask < (1u << k.size()); ++mask) {
    std::vector<Rule> s{p["rr"]};
    for (std::size_t i = 0; i < k.size(); ++i)
      if (mask >> i & 1) s.push_back(k[i]);
    if (oracle::consistent(p.schema, s, points)) continue;
    bool minimal = true;
    for (auto b : bad) minimal &= (b & mask) != b;
    if (!minimal) continue;
    bad.push_back(mask);
  }
  for (auto mask : bad) {
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < k.size(); ++i)
      if (mask >> i & 1) ids.push_back(k[i].id);
    std::sort(ids.begin(), ids.end());
    expected.push_back(ids);
  }
  std::sort(expected.begin(), expected.end());
  EXPECT_EQ(got, expected);
  EXPECT_EQ(expected.size(), 3u);
}

TEST(CliTest, MatrixJsonAndTable) {
  auto r = xkb("matrix --trials 30 --seed 5 --operators s1,s3 --json");
  ASSERT_EQ(r.code, 0);
  auto j = Json::parse(r.out);
  EXPECT_EQ(j["trials"].get<int>(), 30);
  EXPECT_EQ(j["cells"]["s1"]["success"]["fails"].get<int>(), 0);
  auto t = xkb("matrix --trials 30 --seed 5 --operators s1,s3");
  EXPECT_EQ(t.code, 0);
  EXPECT_NE(t.out.find("s3"), std::string::npos);
}

TEST(CliTest, ReviseWritesOutputFile) {
  TempFile out("");
  auto r = xkb("revise --kb " + data("paper.xkb") + " --table " + data("paper.csv") +
               " --scenario s1 --feedback \"rq: f1=1 & f2=1 & f3=1 => c2\" --out " + out.str());
  ASSERT_EQ(r.code, 0);
  auto kb = ExplanationKB::from_document(parse_document(read_file(out.str())));
  EXPECT_TRUE(kb.find("rq") && kb.in_kd("rq"));
  EXPECT_FALSE(kb.find("r4"));
  EXPECT_TRUE(kb.find("rx_w1"));
}

}  // namespace
}  // namespace xkb
