#include <gtest/gtest.h>

#include <sstream>

#include <json.hpp>

#include "fixture.hpp"
#include "indexrag/errors.hpp"
#include "indexrag/eval_harness.hpp"

using namespace indexrag;
using namespace indexrag::testing;
using nlohmann::json;

TEST(Dataset, ParsesFixture) {
  auto ds = read_dataset(aylwin_file("dataset.jsonl"));
  ASSERT_EQ(ds.size(), 10u);
  EXPECT_EQ(ds[0].question, kAylwinQuestion);
  EXPECT_EQ(ds[0].gold_answer, "Weston-super-Mare");
  EXPECT_EQ(ds[0].gold_passage_ids, (std::set<std::string>{"aylwin", "henry_edwards"}));
  EXPECT_EQ(ds[0].question_type, "bridge");
}

TEST(Dataset, RejectsMalformed) {
  std::istringstream missing(R"({"question_id": "q", "question": "x"})");
  EXPECT_THROW(parse_dataset(missing), InputError);
  EXPECT_THROW(read_dataset("/nonexistent.jsonl"), PersistenceError);
}

TEST(Aggregate, MeansAndFailureHandling) {
  std::vector<QuestionRecord> recs(3);
  recs[0].em = 1; recs[0].acc = 1; recs[0].f1 = 1; recs[0].recall_at_k = 1; recs[0].llm_calls = 1;
  recs[1].em = 0; recs[1].acc = 1; recs[1].f1 = 0.5; recs[1].recall_at_k = 0.5; recs[1].llm_calls = 1;
  recs[2].error = "boom";
  auto with = aggregate(recs, false);
  EXPECT_EQ(with.questions, 3u);
  EXPECT_EQ(with.failures, 1u);
  EXPECT_NEAR(with.em, 100.0 / 3.0, 1e-9);
  EXPECT_NEAR(with.acc, 200.0 / 3.0, 1e-9);
  EXPECT_NEAR(with.f1, 50.0, 1e-9);
  auto without = aggregate(recs, true);
  EXPECT_NEAR(without.em, 50.0, 1e-9);
  EXPECT_NEAR(without.f1, 75.0, 1e-9);
  EXPECT_NEAR(without.mean_llm_calls, 1.0, 1e-12);
}

class AylwinEval : public ::testing::Test {
 protected:
  AylwinEval() : gateway(aylwin_script()), index(build_aylwin_index(gateway)) {}
  MockGateway gateway;
  KnowledgeIndex index;
};

TEST_F(AylwinEval, RunAndPerTypeBreakdown) {
  QueryEngine engine(index.store, gateway, {});
  auto report = run_eval(read_dataset(aylwin_file("dataset.jsonl")), engine);
  ASSERT_EQ(report.records.size(), 10u);
  EXPECT_EQ(report.records[0].question_id, "q01");
  EXPECT_EQ(report.recall_k, 10u);
  EXPECT_NEAR(report.overall.em, 100.0, 1e-9);
  EXPECT_NEAR(report.overall.mean_llm_calls, 1.0, 1e-12);
  ASSERT_EQ(report.by_type.size(), 2u);
  EXPECT_EQ(report.by_type.at("bridge").questions, 2u);
  EXPECT_EQ(report.by_type.at("single").questions, 8u);
}

TEST_F(AylwinEval, GatewayFailureIsRecorded) {
  MockGateway broken(MockScript::parse(R"({"embedding_dim": 256, "rules": []})"));
  QueryEngine engine(index.store, broken, {});
  auto report = run_eval(read_dataset(aylwin_file("dataset.jsonl")), engine);
  EXPECT_EQ(report.overall.failures, 10u);
  EXPECT_TRUE(report.records[0].error.has_value());
  EXPECT_EQ(report.overall.em, 0.0);
}

TEST_F(AylwinEval, ReportFilesAgreeWithTable) {
  QueryEngine engine(index.store, gateway, {});
  auto report = run_eval(read_dataset(aylwin_file("dataset.jsonl")), engine);
  TempDir dir;
  write_report(report, dir.path(), {{"gateway", gateway.describe()}});
  auto j = json::parse(slurp(dir / "report.json"));
  EXPECT_NEAR(j["aggregate"]["em"].get<double>(), report.overall.em, 1e-9);
  EXPECT_NEAR(j["aggregate"]["f1"].get<double>(), report.overall.f1, 1e-9);
  EXPECT_EQ(j["config"]["k_b"], 3);
  EXPECT_EQ(j["run_metadata"]["gateway"], gateway.describe());
  std::istringstream lines(slurp(dir / "per_question.jsonl"));
  std::string line;
  int n = 0;
  while (std::getline(lines, line)) {
    auto rec = json::parse(line);
    EXPECT_EQ(rec["question_id"], report.records[n].question_id);
    ++n;
  }
  EXPECT_EQ(n, 10);
  auto table = format_report_table(report);
  EXPECT_NE(table.find("100.00"), std::string::npos);
}

TEST_F(AylwinEval, ParallelMatchesSequential) {
  QueryEngine engine(index.store, gateway, {});
  auto ds = read_dataset(aylwin_file("dataset.jsonl"));
  auto seq = run_eval(ds, engine);
  EvalOptions opts;
  opts.parallelism = 4;
  auto par = run_eval(ds, engine, opts);
  ASSERT_EQ(seq.records.size(), par.records.size());
  for (std::size_t i = 0; i < seq.records.size(); ++i) {
    EXPECT_EQ(seq.records[i].question_id, par.records[i].question_id);
    EXPECT_EQ(seq.records[i].prediction, par.records[i].prediction);
    EXPECT_EQ(seq.records[i].context_ids, par.records[i].context_ids);
  }
}
