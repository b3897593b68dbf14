#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cli.hpp"
#include "fixture.hpp"

using namespace indexrag;
using namespace indexrag::testing;
using nlohmann::json;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run_cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string mock() { return aylwin_file("mock.json").string(); }

std::size_t bridging_in(const json& result) {
  std::size_t n = 0;
  for (const auto& c : result["context"]) n += c["kind"] == "bridging";
  return n;
}

json strip_timing(json j) {
  if (j.is_object()) {
    j.erase("run_metadata");
    j.erase("retrieval_latency_s");
    j.erase("mean_retrieval_latency_s");
    for (auto& [k, v] : j.items()) v = strip_timing(v);
  }
  return j;
}

std::string stripped_lines(const std::filesystem::path& path) {
  std::istringstream in(slurp(path));
  std::string line, out;
  while (std::getline(in, line)) out += strip_timing(json::parse(line)).dump() + "\n";
  return out;
}

}  // namespace

class CliTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new TempDir();
    auto r = run_cli({"--mock-script", mock(), "index", "--corpus", aylwin_file("corpus.jsonl").string(), "--index",
                      index_dir()});
    ASSERT_EQ(r.code, 0) << r.err;
  }
  static void TearDownTestSuite() {
    delete dir_;
    dir_ = nullptr;
  }
  static std::string index_dir() { return (*dir_ / "idx").string(); }
  static std::string scratch(const std::string& name) { return (*dir_ / name).string(); }

  static std::string write_config(const std::string& name, const json& j) {
    auto path = scratch(name);
    std::ofstream(path) << j.dump();
    return path;
  }

  static json query_json(std::vector<std::string> extra, const std::string& question = kAylwinQuestion) {
    std::vector<std::string> args = {"--mock-script", mock()};
    std::vector<std::string> tail = {"query", "--index", index_dir(), "--json"};
    for (auto& a : extra) tail.push_back(a);
    tail.push_back(question);
    args.insert(args.end(), tail.begin(), tail.end());
    auto r = run_cli(args);
    EXPECT_EQ(r.code, 0) << r.err;
    return json::parse(r.out);
  }

  static TempDir* dir_;
};

TempDir* CliTest::dir_ = nullptr;

TEST_F(CliTest, IndexPrintsStatistics) {
  auto r = run_cli({"--mock-script", mock(), "inspect", "--index", index_dir()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("bridge entities: 4"), std::string::npos);
  EXPECT_NE(r.out.find("bridging: 4"), std::string::npos);
  EXPECT_NE(r.out.find("non-empty rate: 0.75"), std::string::npos);
}

TEST_F(CliTest, QueryAylwin) {
  auto r = run_cli({"--mock-script", mock(), "query", "--index", index_dir(), kAylwinQuestion});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("answer: Weston-super-Mare\n"), std::string::npos);
  EXPECT_NE(r.out.find("llm_calls: 1\n"), std::string::npos);
}

TEST_F(CliTest, QueryWithoutBridging) {
  auto j = query_json({"--kb", "0"});
  EXPECT_EQ(bridging_in(j), 0u);
  EXPECT_EQ(j["answer"], "Henry Edwards");
}

TEST_F(CliTest, QueryIrcotDoneAtFirstStep) {
  auto j = query_json({"--mode", "ircot"});
  EXPECT_EQ(j["llm_calls"], 2);
  EXPECT_EQ(j["steps"].size(), 1u);
}

TEST_F(CliTest, EvalTableMatchesReport) {
  auto out = scratch("eval_single");
  auto r = run_cli({"--mock-script", mock(), "eval", "--index", index_dir(), "--dataset",
                    aylwin_file("dataset.jsonl").string(), "--out", out});
  ASSERT_EQ(r.code, 0) << r.err;
  auto report = json::parse(slurp(std::filesystem::path(out) / "report.json"));
  std::ostringstream row;
  row.setf(std::ios::fixed);
  row.precision(2);
  row << report["aggregate"]["em"].get<double>();
  EXPECT_NE(r.out.find(row.str()), std::string::npos);
  EXPECT_TRUE(report["run_metadata"].contains("timestamp"));
  EXPECT_TRUE(report["run_metadata"].contains("hardware"));
}

TEST_F(CliTest, EvalSweepWritesOneReportPerValue) {
  auto out = scratch("sweep");
  auto r = run_cli({"--mock-script", mock(), "eval", "--index", index_dir(), "--dataset",
                    aylwin_file("dataset.jsonl").string(), "--out", out, "--kb", "0", "1", "2", "3", "5"});
  ASSERT_EQ(r.code, 0) << r.err;
  for (int kb : {0, 1, 2, 3, 5}) {
    auto path = std::filesystem::path(out) / ("kb_" + std::to_string(kb)) / "report.json";
    ASSERT_TRUE(std::filesystem::exists(path)) << path;
    EXPECT_EQ(json::parse(slurp(path))["config"]["k_b"], kb);
  }
}

TEST_F(CliTest, EvalIsDeterministic) {
  std::vector<std::string> base = {"--mock-script", mock(), "eval", "--index", index_dir(), "--dataset",
                                   aylwin_file("dataset.jsonl").string(), "--parallelism", "3", "--out"};
  auto a = base, b = base;
  a.push_back(scratch("det_a"));
  b.push_back(scratch("det_b"));
  ASSERT_EQ(run_cli(a).code, 0);
  ASSERT_EQ(run_cli(b).code, 0);
  auto pa = std::filesystem::path(scratch("det_a")), pb = std::filesystem::path(scratch("det_b"));
  EXPECT_EQ(stripped_lines(pa / "per_question.jsonl"), stripped_lines(pb / "per_question.jsonl"));
  EXPECT_EQ(strip_timing(json::parse(slurp(pa / "report.json"))), strip_timing(json::parse(slurp(pb / "report.json"))));
}

TEST_F(CliTest, MissingDatasetFails) {
  auto r = run_cli({"--mock-script", mock(), "eval", "--index", index_dir(), "--dataset", scratch("nope.jsonl")});
  EXPECT_NE(r.code, 0);
  EXPECT_NE(r.err.find("nope.jsonl"), std::string::npos);
}

TEST_F(CliTest, MissingIndexFails) {
  auto r = run_cli({"--mock-script", mock(), "query", "--index", scratch("no_index"), "q?"});
  EXPECT_NE(r.code, 0);
  EXPECT_NE(r.err.find("no_index"), std::string::npos);
}

TEST_F(CliTest, GatewayFailureExitsNonzero) {
  auto script = write_config("empty_mock.json", {{"embedding_dim", 256}, {"rules", json::array()}});
  auto r = run_cli({"--mock-script", script, "query", "--index", index_dir(), kAylwinQuestion});
  EXPECT_NE(r.code, 0);
}

TEST_F(CliTest, NoModelConfigured) {
  ::unsetenv("INDEXRAG_API_KEY");
  ::unsetenv("OPENAI_API_KEY");
  auto r = run_cli({"query", "--index", index_dir(), kAylwinQuestion});
  EXPECT_NE(r.code, 0);
  EXPECT_NE(r.err.find("--mock-script"), std::string::npos);
}

TEST_F(CliTest, ConfigRejectsCredentialsAndUnknownKeys) {
  auto secret = write_config("secret.json", {{"api_key", "sk-123"}});
  EXPECT_NE(run_cli({"--config", secret, "inspect", "--index", index_dir()}).code, 0);
  auto unknown = write_config("unknown.json", {{"colour", "blue"}});
  EXPECT_NE(run_cli({"--config", unknown, "inspect", "--index", index_dir()}).code, 0);
}

TEST_F(CliTest, PrecedenceForContextSize) {
  auto cfg = write_config("k7.json", {{"k", 7}});
  EXPECT_EQ(query_json({})["context"].size(), 10u);
  EXPECT_EQ(query_json({"--config", cfg})["context"].size(), 7u);
  EXPECT_EQ(query_json({"--config", cfg, "--k", "5"})["context"].size(), 5u);
}

TEST_F(CliTest, PrecedenceForBridgingBudget) {
  auto cfg = write_config("kb0.json", {{"kb", 0}});
  EXPECT_EQ(query_json({})["answer"], "Weston-super-Mare");
  EXPECT_EQ(bridging_in(query_json({"--config", cfg})), 0u);
  auto j = query_json({"--config", cfg, "--kb", "3"});
  EXPECT_GE(bridging_in(j), 1u);
}

TEST_F(CliTest, PrecedenceForTau) {
  auto corpus = aylwin_file("corpus.jsonl").string();
  auto cfg = write_config("tau2.json", {{"tau", 2}, {"mock_script", mock()}});
  auto a = run_cli({"--mock-script", mock(), "index", "--corpus", corpus, "--index", scratch("tau_default")});
  auto b = run_cli({"--config", cfg, "index", "--corpus", corpus, "--index", scratch("tau_config")});
  auto c = run_cli({"--config", cfg, "index", "--corpus", corpus, "--index", scratch("tau_flag"), "--tau", "10"});
  EXPECT_NE(a.out.find("bridge entities: 4"), std::string::npos) << a.err;
  EXPECT_NE(b.out.find("bridge entities: 3"), std::string::npos) << b.err;
  EXPECT_NE(c.out.find("bridge entities: 4"), std::string::npos) << c.err;
}

TEST_F(CliTest, AddReportsBridgeChanges) {
  auto copy = scratch("idx_add");
  std::filesystem::copy(index_dir(), copy, std::filesystem::copy_options::recursive);
  auto r = run_cli({"--mock-script", mock(), "add", "--index", copy, "--doc", aylwin_file("add_doc.jsonl").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("newly bridged: aylwin"), std::string::npos);
  EXPECT_NE(r.out.find("rebridged: chrissie white, henry edwards"), std::string::npos);
  EXPECT_NE(r.out.find("documents: 15"), std::string::npos);
}

TEST_F(CliTest, UsageErrors) {
  EXPECT_NE(run_cli({}).code, 0);
  EXPECT_NE(run_cli({"frobnicate"}).code, 0);
  EXPECT_NE(run_cli({"--mock-script", mock(), "query", "--index", index_dir(), "--k", "0", "q?"}).code, 0);
  EXPECT_EQ(run_cli({"--help"}).code, 0);
}
