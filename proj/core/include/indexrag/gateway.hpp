#pragma once

#include <atomic>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <mutex>
#include <string>
#include <vector>

#include "indexrag/knowledge.hpp"

namespace indexrag {

/// Answer generation uses the short default; indexing calls pass kIndexingMaxTokens.
inline constexpr int kAnswerMaxTokens = 50;
inline constexpr int kIndexingMaxTokens = 2048;

struct ChatRequest {
  std::string system;
  std::string user;
  double temperature = 0.0;
  int max_tokens = kAnswerMaxTokens;

  void validate() const;
};

struct CallLedgerSnapshot {
  std::uint64_t chat_calls = 0;
  std::uint64_t embed_calls = 0;
  std::vector<std::chrono::nanoseconds> wall_times;
};

/// Counts successful chat completions and embedding protocol requests. Thread-safe.
class CallLedger {
 public:
  void record_chat(std::chrono::nanoseconds elapsed);
  void record_embed(std::uint64_t requests, std::chrono::nanoseconds elapsed);

  std::uint64_t chat_calls() const { return chat_calls_.load(); }
  std::uint64_t embed_calls() const { return embed_calls_.load(); }
  CallLedgerSnapshot snapshot() const;

 private:
  std::atomic<std::uint64_t> chat_calls_{0};
  std::atomic<std::uint64_t> embed_calls_{0};
  mutable std::mutex mu_;
  std::vector<std::chrono::nanoseconds> wall_times_;
};

/// Single access point to the chat and embedding models. Implementations must be safe to
/// call concurrently; the ledger is updated atomically.
class ModelGateway {
 public:
  virtual ~ModelGateway() = default;

  /// Returns the completion text. Counts one chat call per successful completion only.
  std::string chat_complete(const ChatRequest& req);

  /// One vector per input text, all of one dimension. Texts are sent in batches of
  /// embed_batch_size(); each batch is one protocol request.
  std::vector<Embedding> embed_batch(const std::vector<std::string>& texts);

  const CallLedger& ledger() const { return ledger_; }

  virtual std::string describe() const = 0;

 protected:
  virtual std::string complete(const ChatRequest& req) = 0;
  virtual std::vector<Embedding> embed_request(const std::vector<std::string>& texts) = 0;
  virtual std::size_t embed_batch_size() const { return 64; }

 private:
  CallLedger ledger_;
};

}  // namespace indexrag
