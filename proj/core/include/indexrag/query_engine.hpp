#pragma once

#include <chrono>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "indexrag/gateway.hpp"
#include "indexrag/vector_store.hpp"

namespace indexrag {

enum class QueryMode { kSinglePass, kIrcot };

std::string_view to_string(QueryMode mode);
QueryMode query_mode_from_string(std::string_view s);

struct QueryConfig {
  int n_candidates = 20;
  int k = 10;
  int k_b = 3;
  QueryMode mode = QueryMode::kSinglePass;
  int ircot_steps = 3;
  int ircot_per_step = 20;

  /// Requires 1 <= k <= n_candidates, 0 <= k_b <= k, ircot_steps >= 1, ircot_per_step >= 1.
  void validate() const;

  friend bool operator==(const QueryConfig&, const QueryConfig&) = default;
};

struct ReasoningStep {
  std::string reasoning;
  std::string search_query;  // "DONE" when the step ended the loop
};

struct QueryResult {
  std::string answer;
  std::vector<SearchHit> selected_context;
  int llm_calls = 0;
  std::chrono::nanoseconds retrieval_latency{0};
  std::vector<ReasoningStep> steps_trace;  // empty in single-pass mode
};

/// Greedy pass over `ranked`: keep every AKU, keep a bridging entry only while fewer than
/// k_b are kept, stop at k. Returns kept positions in rank order.
std::vector<std::size_t> balanced_select_indices(std::span<const EntryKind> ranked, std::size_t k, std::size_t k_b);
std::vector<SearchHit> balanced_select(std::span<const SearchHit> ranked, std::size_t k, std::size_t k_b);

/// "[1] text\n[2] text..." in the given order; empty for no entries.
std::string format_context(std::span<const SearchHit> context);

struct IrcotStepReply {
  std::string reasoning;
  std::string search;  // empty when done
  bool done = false;
  bool well_formed = false;
};

/// Reads the "Reasoning:" and "Search:" lines. A missing Search line, an empty query or DONE
/// ends the loop.
IrcotStepReply parse_ircot_step(std::string_view reply);

/// Online phase over a read-only store. Safe for concurrent queries.
class QueryEngine {
 public:
  QueryEngine(const VectorStore& store, ModelGateway& gateway, QueryConfig config);

  /// Embeds the query once and returns the top-n hits. Throws InputError on an empty query.
  std::vector<SearchHit> retrieve(std::string_view query, std::size_t n) const;

  QueryResult answer(const std::string& question) const;
  QueryResult answer_single(const std::string& question) const;
  QueryResult answer_ircot(const std::string& question) const;

  const QueryConfig& config() const { return config_; }

 private:
  std::string generate_answer(const std::string& question, std::span<const SearchHit> context) const;

  const VectorStore& store_;
  ModelGateway& gateway_;
  QueryConfig config_;
};

}  // namespace indexrag
