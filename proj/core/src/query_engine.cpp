#include "indexrag/query_engine.hpp"

#include <algorithm>
#include <cctype>
#include <unordered_map>

#include <spdlog/spdlog.h>

#include "indexrag/errors.hpp"
#include "indexrag/prompts.hpp"

namespace indexrag {

using Clock = std::chrono::steady_clock;

namespace {

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

bool starts_with_nocase(std::string_view s, std::string_view prefix) {
  if (s.size() < prefix.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(s[i])) != std::tolower(static_cast<unsigned char>(prefix[i]))) {
      return false;
    }
  }
  return true;
}

bool is_done_marker(std::string s) {
  while (!s.empty() && (s.back() == '.' || s.back() == '"' || s.back() == '\'')) s.pop_back();
  while (!s.empty() && (s.front() == '"' || s.front() == '\'')) s.erase(s.begin());
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  return s == "DONE";
}

}  // namespace

std::string_view to_string(QueryMode mode) { return mode == QueryMode::kSinglePass ? "single_pass" : "ircot"; }

QueryMode query_mode_from_string(std::string_view s) {
  if (s == "single_pass" || s == "single") return QueryMode::kSinglePass;
  if (s == "ircot") return QueryMode::kIrcot;
  throw InputError("unknown query mode '" + std::string(s) + "'");
}

void QueryConfig::validate() const {
  if (k < 1) throw InputError("k must be at least 1");
  if (n_candidates < k) throw InputError("n_candidates must be at least k");
  if (k_b < 0) throw InputError("k_b must be non-negative");
  if (k_b > k) throw InputError("k_b must not exceed k");
  if (ircot_steps < 1) throw InputError("ircot_steps must be at least 1");
  if (ircot_per_step < 1) throw InputError("ircot_per_step must be at least 1");
}

std::vector<std::size_t> balanced_select_indices(std::span<const EntryKind> ranked, std::size_t k, std::size_t k_b) {
  std::vector<std::size_t> chosen;
  std::size_t bridging = 0;
  for (std::size_t i = 0; i < ranked.size() && chosen.size() < k; ++i) {
    if (ranked[i] == EntryKind::kAku) {
      chosen.push_back(i);
    } else if (bridging < k_b) {
      chosen.push_back(i);
      ++bridging;
    }
  }
  return chosen;
}

std::vector<SearchHit> balanced_select(std::span<const SearchHit> ranked, std::size_t k, std::size_t k_b) {
  std::vector<EntryKind> kinds;
  kinds.reserve(ranked.size());
  for (const auto& h : ranked) kinds.push_back(h.entry.kind);
  std::vector<SearchHit> out;
  for (auto i : balanced_select_indices(kinds, k, k_b)) out.push_back(ranked[i]);
  return out;
}

std::string format_context(std::span<const SearchHit> context) {
  std::string out;
  for (std::size_t i = 0; i < context.size(); ++i) {
    if (i > 0) out += '\n';
    out += "[" + std::to_string(i + 1) + "] " + context[i].entry.text;
  }
  return out;
}

IrcotStepReply parse_ircot_step(std::string_view reply) {
  IrcotStepReply out;
  bool saw_search = false;
  std::size_t pos = 0;
  while (pos <= reply.size()) {
    auto nl = reply.find('\n', pos);
    std::string line = trim(reply.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos));
    if (starts_with_nocase(line, "reasoning:")) {
      out.reasoning = trim(std::string_view(line).substr(10));
    } else if (starts_with_nocase(line, "search:")) {
      out.search = trim(std::string_view(line).substr(7));
      saw_search = true;
    }
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
  out.well_formed = saw_search;
  if (!saw_search || out.search.empty() || is_done_marker(out.search)) {
    out.done = true;
    out.search.clear();
  }
  return out;
}

QueryEngine::QueryEngine(const VectorStore& store, ModelGateway& gateway, QueryConfig config)
    : store_(store), gateway_(gateway), config_(config) {
  config_.validate();
}

std::vector<SearchHit> QueryEngine::retrieve(std::string_view query, std::size_t n) const {
  if (trim(query).empty()) throw InputError("query is empty");
  auto vectors = gateway_.embed_batch({std::string(query)});
  return store_.search(vectors.front(), n);
}

std::string QueryEngine::generate_answer(const std::string& question, std::span<const SearchHit> context) const {
  ChatRequest req;
  req.user = render_prompt(TemplateId::kAnswerGen, {{"context", format_context(context)}, {"question", question}});
  req.temperature = 0.0;
  req.max_tokens = kAnswerMaxTokens;
  return trim(gateway_.chat_complete(req));
}

QueryResult QueryEngine::answer(const std::string& question) const {
  return config_.mode == QueryMode::kSinglePass ? answer_single(question) : answer_ircot(question);
}

QueryResult QueryEngine::answer_single(const std::string& question) const {
  QueryResult result;
  auto start = Clock::now();
  auto hits = retrieve(question, static_cast<std::size_t>(config_.n_candidates));
  result.selected_context =
      balanced_select(hits, static_cast<std::size_t>(config_.k), static_cast<std::size_t>(config_.k_b));
  result.retrieval_latency = Clock::now() - start;
  result.answer = generate_answer(question, result.selected_context);
  result.llm_calls = 1;
  return result;
}

QueryResult QueryEngine::answer_ircot(const std::string& question) const {
  QueryResult result;
  const auto k = static_cast<std::size_t>(config_.k);
  const auto k_b = static_cast<std::size_t>(config_.k_b);

  // Union of step hits keyed by entry_id, keeping each entry's best score.
  std::vector<SearchHit> pool;
  std::unordered_map<std::string, std::size_t> where;
  auto ranked_pool = [&] {
    std::vector<SearchHit> ranked = pool;
    std::stable_sort(ranked.begin(), ranked.end(), [](const SearchHit& a, const SearchHit& b) { return a.score > b.score; });
    return ranked;
  };

  std::string search = question;
  std::string cot;
  for (int step = 0; step < config_.ircot_steps; ++step) {
    auto start = Clock::now();
    for (auto& hit : retrieve(search, static_cast<std::size_t>(config_.ircot_per_step))) {
      auto [it, inserted] = where.try_emplace(hit.entry.entry_id, pool.size());
      if (inserted) {
        pool.push_back(std::move(hit));
      } else if (hit.score > pool[it->second].score) {
        pool[it->second].score = hit.score;
      }
    }
    auto context = balanced_select(ranked_pool(), k, k_b);
    result.retrieval_latency += Clock::now() - start;

    ChatRequest req;
    req.user = render_prompt(TemplateId::kIrcotStep,
                             {{"question", question}, {"context", format_context(context)}, {"cot_so_far", cot}});
    req.temperature = 0.0;
    req.max_tokens = kAnswerMaxTokens;
    auto reply = parse_ircot_step(gateway_.chat_complete(req));
    ++result.llm_calls;
    if (!reply.well_formed) spdlog::warn("reasoning step {} is malformed; answering now", step + 1);

    if (!reply.reasoning.empty()) {
      if (!cot.empty()) cot += '\n';
      cot += reply.reasoning;
    }
    result.steps_trace.push_back({reply.reasoning, reply.done ? "DONE" : reply.search});
    if (reply.done) break;
    search = reply.search;
  }

  auto start = Clock::now();
  result.selected_context = balanced_select(ranked_pool(), k, k_b);
  result.retrieval_latency += Clock::now() - start;
  result.answer = generate_answer(question, result.selected_context);
  ++result.llm_calls;
  return result;
}

}  // namespace indexrag
