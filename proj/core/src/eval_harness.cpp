#include "indexrag/eval_harness.hpp"

#include <cstdio>
#include <fstream>
#include <istream>
#include <sstream>

#include <json.hpp>

#include "indexrag/errors.hpp"
#include "indexrag/metrics.hpp"
#include "parallel.hpp"

namespace indexrag {

using nlohmann::json;
using nlohmann::ordered_json;

std::vector<EvalQuestion> parse_dataset(std::istream& in) {
  std::vector<EvalQuestion> out;
  std::set<std::string> ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto where = "dataset line " + std::to_string(line_no);
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw InputError(where + ": not a JSON object");
    EvalQuestion q;
    try {
      q.question_id = j.at("question_id").get<std::string>();
      q.question = j.at("question").get<std::string>();
      q.gold_answer = j.at("answer").get<std::string>();
      if (j.contains("supporting_ids")) q.gold_passage_ids = j["supporting_ids"].get<std::set<std::string>>();
      if (j.contains("type") && j["type"].is_string()) q.question_type = j["type"].get<std::string>();
    } catch (const json::exception& e) {
      throw InputError(where + ": " + e.what());
    }
    if (q.question_id.empty() || q.question.empty()) throw InputError(where + ": empty question_id or question");
    if (q.gold_answer.empty()) throw InputError(where + ": empty gold answer");
    if (!ids.insert(q.question_id).second) throw InputError(where + ": duplicate question_id " + q.question_id);
    out.push_back(std::move(q));
  }
  return out;
}

std::vector<EvalQuestion> read_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw PersistenceError("cannot open dataset " + path.string());
  return parse_dataset(in);
}

Aggregate aggregate(std::span<const QuestionRecord> records, bool exclude_failures) {
  Aggregate a;
  for (const auto& r : records) {
    if (r.error) ++a.failures;
    if (r.error && exclude_failures) continue;
    ++a.questions;
    a.em += r.em;
    a.acc += r.acc;
    a.f1 += r.f1;
    a.recall_at_k += r.recall_at_k;
    a.mean_llm_calls += r.llm_calls;
    a.mean_retrieval_latency_s += r.retrieval_latency_s;
  }
  if (a.questions > 0) {
    auto n = static_cast<double>(a.questions);
    a.em = 100.0 * a.em / n;
    a.acc = 100.0 * a.acc / n;
    a.f1 = 100.0 * a.f1 / n;
    a.recall_at_k = 100.0 * a.recall_at_k / n;
    a.mean_llm_calls /= n;
    a.mean_retrieval_latency_s /= n;
  }
  return a;
}

QuestionRecord evaluate_question(const EvalQuestion& q, const QueryEngine& engine, std::size_t recall_k) {
  QuestionRecord r;
  r.question_id = q.question_id;
  r.question = q.question;
  r.gold_answer = q.gold_answer;
  r.question_type = q.question_type;
  try {
    auto result = engine.answer(q.question);
    r.prediction = result.answer;
    for (const auto& hit : result.selected_context) {
      r.context_ids.push_back(hit.entry.entry_id);
      r.context_kinds.emplace_back(to_string(hit.entry.kind));
    }
    r.em = exact_match(result.answer, q.gold_answer);
    r.acc = answer_accuracy(result.answer, q.gold_answer);
    r.f1 = f1_score(result.answer, q.gold_answer);
    r.recall_at_k = recall_at_k(result.selected_context, q.gold_passage_ids, recall_k);
    r.llm_calls = result.llm_calls;
    r.retrieval_latency_s = std::chrono::duration<double>(result.retrieval_latency).count();
  } catch (const Error& e) {
    r.error = e.what();
  }
  return r;
}

EvalReport run_eval(const std::vector<EvalQuestion>& dataset, const QueryEngine& engine, const EvalOptions& options) {
  EvalReport report;
  report.config = engine.config();
  report.recall_k = options.recall_k ? options.recall_k : static_cast<std::size_t>(engine.config().k);
  report.records.resize(dataset.size());
  detail::parallel_for(dataset.size(), options.parallelism, [&](std::size_t i) {
    report.records[i] = evaluate_question(dataset[i], engine, report.recall_k);
  });
  report.overall = aggregate(report.records, options.exclude_failures);

  std::map<std::string, std::vector<QuestionRecord>> groups;
  for (const auto& r : report.records) {
    if (r.question_type) groups[*r.question_type].push_back(r);
  }
  for (const auto& [type, records] : groups) report.by_type[type] = aggregate(records, options.exclude_failures);
  return report;
}

namespace {

ordered_json aggregate_json(const Aggregate& a) {
  return {{"questions", a.questions},
          {"failures", a.failures},
          {"em", a.em},
          {"acc", a.acc},
          {"f1", a.f1},
          {"recall_at_k", a.recall_at_k},
          {"mean_llm_calls", a.mean_llm_calls},
          {"mean_retrieval_latency_s", a.mean_retrieval_latency_s}};
}

ordered_json config_json(const EvalReport& r) {
  return {{"mode", to_string(r.config.mode)},
          {"n_candidates", r.config.n_candidates},
          {"k", r.config.k},
          {"k_b", r.config.k_b},
          {"ircot_steps", r.config.ircot_steps},
          {"ircot_per_step", r.config.ircot_per_step},
          {"recall_k", r.recall_k}};
}

}  // namespace

void write_report(const EvalReport& report, const std::filesystem::path& out_dir,
                  const std::map<std::string, std::string>& run_metadata) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw PersistenceError("cannot create output directory " + out_dir.string() + ": " + ec.message());

  ordered_json summary;
  summary["config"] = config_json(report);
  summary["aggregate"] = aggregate_json(report.overall);
  if (!report.by_type.empty()) {
    ordered_json types = ordered_json::object();
    for (const auto& [type, a] : report.by_type) types[type] = aggregate_json(a);
    summary["by_type"] = types;
  }
  ordered_json meta = ordered_json::object();
  for (const auto& [k, v] : run_metadata) meta[k] = v;
  summary["run_metadata"] = meta;

  std::ofstream out(out_dir / "report.json", std::ios::trunc);
  if (!out) throw PersistenceError("cannot write " + (out_dir / "report.json").string());
  out << summary.dump(2) << '\n';

  std::ofstream per(out_dir / "per_question.jsonl", std::ios::trunc);
  if (!per) throw PersistenceError("cannot write " + (out_dir / "per_question.jsonl").string());
  for (const auto& r : report.records) {
    ordered_json j = {{"question_id", r.question_id},
                      {"question", r.question},
                      {"gold_answer", r.gold_answer},
                      {"prediction", r.prediction},
                      {"em", r.em},
                      {"acc", r.acc},
                      {"f1", r.f1},
                      {"recall_at_k", r.recall_at_k},
                      {"llm_calls", r.llm_calls},
                      {"retrieval_latency_s", r.retrieval_latency_s},
                      {"context_ids", r.context_ids},
                      {"context_kinds", r.context_kinds}};
    if (r.question_type) j["type"] = *r.question_type;
    if (r.error) j["error"] = *r.error;
    per << j.dump() << '\n';
  }
}

std::string format_report_table(const EvalReport& report) {
  auto row = [](const std::string& name, const Aggregate& a) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%-16s %6zu %7.2f %7.2f %7.2f %9.2f %7.2f %10.4f\n", name.c_str(), a.questions, a.em,
                  a.acc, a.f1, a.recall_at_k, a.mean_llm_calls, a.mean_retrieval_latency_s);
    return std::string(buf);
  };
  std::ostringstream out;
  char header[256];
  std::snprintf(header, sizeof header, "%-16s %6s %7s %7s %7s %9s %7s %10s\n", "subset", "n", "EM", "Acc", "F1",
                ("R@" + std::to_string(report.recall_k)).c_str(), "calls", "latency_s");
  out << header << row("all", report.overall);
  for (const auto& [type, a] : report.by_type) out << row(type, a);
  return out.str();
}

}  // namespace indexrag
