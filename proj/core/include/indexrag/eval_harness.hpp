#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "indexrag/query_engine.hpp"

namespace indexrag {

struct EvalQuestion {
  std::string question_id;
  std::string question;
  std::string gold_answer;
  std::set<std::string> gold_passage_ids;
  std::optional<std::string> question_type;
};

/// Line-delimited JSON: {"question_id", "question", "answer", "supporting_ids", "type"?}.
/// Throws InputError naming the line on malformed records.
std::vector<EvalQuestion> parse_dataset(std::istream& in);
std::vector<EvalQuestion> read_dataset(const std::filesystem::path& path);

struct QuestionRecord {
  std::string question_id;
  std::string question;
  std::string gold_answer;
  std::optional<std::string> question_type;
  std::string prediction;
  std::vector<std::string> context_ids;
  std::vector<std::string> context_kinds;
  double em = 0.0;
  double acc = 0.0;
  double f1 = 0.0;
  double recall_at_k = 0.0;
  int llm_calls = 0;
  double retrieval_latency_s = 0.0;
  std::optional<std::string> error;
};

/// Means over the included records. Quality metrics are percentages (x100).
struct Aggregate {
  std::size_t questions = 0;
  std::size_t failures = 0;
  double em = 0.0;
  double acc = 0.0;
  double f1 = 0.0;
  double recall_at_k = 0.0;
  double mean_llm_calls = 0.0;
  double mean_retrieval_latency_s = 0.0;
};

struct EvalOptions {
  int parallelism = 1;
  bool exclude_failures = false;  // default: failed questions score zero and stay in the means
  std::size_t recall_k = 0;       // 0 means the engine's k
};

struct EvalReport {
  QueryConfig config;
  std::size_t recall_k = 0;
  std::vector<QuestionRecord> records;  // dataset order
  Aggregate overall;
  std::map<std::string, Aggregate> by_type;  // only when questions carry a type
};

Aggregate aggregate(std::span<const QuestionRecord> records, bool exclude_failures);

/// Scores one question. Engine errors are recorded on the record, never thrown.
QuestionRecord evaluate_question(const EvalQuestion& q, const QueryEngine& engine, std::size_t recall_k);

EvalReport run_eval(const std::vector<EvalQuestion>& dataset, const QueryEngine& engine,
                    const EvalOptions& options = {});

/// Writes report.json (config, aggregates, run metadata) and per_question.jsonl.
void write_report(const EvalReport& report, const std::filesystem::path& out_dir,
                  const std::map<std::string, std::string>& run_metadata = {});

/// Plain-text aggregate table.
std::string format_report_table(const EvalReport& report);

}  // namespace indexrag
