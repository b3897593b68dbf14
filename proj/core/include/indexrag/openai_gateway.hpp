#pragma once

#include <chrono>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "indexrag/gateway.hpp"

namespace indexrag {

/// Up to max_attempts tries with exponential backoff on transport errors, HTTP 429 and 5xx.
/// Every other non-2xx status fails immediately.
struct RetryPolicy {
  int max_attempts = 3;
  std::chrono::milliseconds initial_backoff{500};
  double multiplier = 2.0;

  static bool is_retryable_status(int status) { return status == 429 || (status >= 500 && status <= 599); }
  std::chrono::milliseconds backoff_before(int attempt) const;  // attempt is 1-based, >= 2
};

/// Outcome of one HTTP exchange. status == 0 means the transport failed.
struct HttpOutcome {
  int status = 0;
  std::string body;
  std::string transport_error;
};

using SleepFn = std::function<void(std::chrono::milliseconds)>;

/// Runs `attempt` under the policy and returns the first 2xx outcome. Throws GatewayError
/// (carrying the last status) once attempts are exhausted or on a non-retryable status.
HttpOutcome send_with_retry(const RetryPolicy& policy, const std::function<HttpOutcome()>& attempt,
                            const SleepFn& sleep = {});

struct OpenAiConfig {
  std::string base_url = "https://api.openai.com/v1";
  std::string api_key;
  std::string chat_model = "gpt-4o-mini";
  std::string embedding_model = "text-embedding-3-small";
  std::chrono::seconds timeout{120};
  std::size_t embed_batch_size = 64;
  RetryPolicy retry;

  /// Reads INDEXRAG_API_KEY (or OPENAI_API_KEY) and INDEXRAG_BASE_URL (or OPENAI_BASE_URL)
  /// over the given defaults.
  static OpenAiConfig from_environment(OpenAiConfig defaults);
  static OpenAiConfig from_environment();
};

/// Chat completions and embeddings over the OpenAI-compatible JSON protocol.
class OpenAiGateway final : public ModelGateway {
 public:
  explicit OpenAiGateway(OpenAiConfig config, SleepFn sleep = {});

  std::string describe() const override;
  const OpenAiConfig& config() const { return config_; }

 protected:
  std::string complete(const ChatRequest& req) override;
  std::vector<Embedding> embed_request(const std::vector<std::string>& texts) override;
  std::size_t embed_batch_size() const override { return config_.embed_batch_size; }

 private:
  HttpOutcome post_json(const std::string& path, const std::string& body) const;

  OpenAiConfig config_;
  std::string origin_;     // scheme://host[:port]
  std::string path_base_;  // e.g. /v1
  SleepFn sleep_;
};

}  // namespace indexrag
