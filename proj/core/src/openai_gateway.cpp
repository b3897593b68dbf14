#include "indexrag/openai_gateway.hpp"

#include <cmath>
#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <json.hpp>
#include <spdlog/spdlog.h>

#include "indexrag/errors.hpp"

namespace indexrag {

using nlohmann::json;

std::chrono::milliseconds RetryPolicy::backoff_before(int attempt) const {
  double factor = std::pow(multiplier, std::max(0, attempt - 2));
  return std::chrono::milliseconds(static_cast<long long>(static_cast<double>(initial_backoff.count()) * factor));
}

HttpOutcome send_with_retry(const RetryPolicy& policy, const std::function<HttpOutcome()>& attempt,
                            const SleepFn& sleep) {
  const int attempts = std::max(1, policy.max_attempts);
  HttpOutcome last;
  for (int i = 1; i <= attempts; ++i) {
    if (i > 1) {
      auto wait = policy.backoff_before(i);
      if (sleep) {
        sleep(wait);
      } else {
        std::this_thread::sleep_for(wait);
      }
    }
    last = attempt();
    if (last.status >= 200 && last.status < 300) return last;
    if (last.status != 0 && !RetryPolicy::is_retryable_status(last.status)) {
      throw GatewayError("HTTP " + std::to_string(last.status) + ": " + last.body.substr(0, 300), last.status);
    }
    spdlog::warn("gateway attempt {}/{} failed: {}", i, attempts,
                 last.status == 0 ? last.transport_error : "HTTP " + std::to_string(last.status));
  }
  if (last.status == 0) {
    throw GatewayError("transport failure after " + std::to_string(attempts) + " attempts: " + last.transport_error);
  }
  throw GatewayError("HTTP " + std::to_string(last.status) + " after " + std::to_string(attempts) + " attempts",
                     last.status);
}

namespace {

std::string env_or(const char* primary, const char* fallback, const std::string& def) {
  if (const char* v = std::getenv(primary); v && *v) return v;
  if (fallback) {
    if (const char* v = std::getenv(fallback); v && *v) return v;
  }
  return def;
}

}  // namespace

OpenAiConfig OpenAiConfig::from_environment(OpenAiConfig defaults) {
  defaults.api_key = env_or("INDEXRAG_API_KEY", "OPENAI_API_KEY", defaults.api_key);
  defaults.base_url = env_or("INDEXRAG_BASE_URL", "OPENAI_BASE_URL", defaults.base_url);
  return defaults;
}

OpenAiConfig OpenAiConfig::from_environment() { return from_environment(OpenAiConfig{}); }

OpenAiGateway::OpenAiGateway(OpenAiConfig config, SleepFn sleep)
    : config_(std::move(config)), sleep_(std::move(sleep)) {
  const auto& url = config_.base_url;
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw InputError("endpoint URL needs a scheme: " + url);
  auto path_start = url.find('/', scheme_end + 3);
  origin_ = url.substr(0, path_start);
  path_base_ = path_start == std::string::npos ? "" : url.substr(path_start);
  while (!path_base_.empty() && path_base_.back() == '/') path_base_.pop_back();
}

std::string OpenAiGateway::describe() const {
  return "openai(" + config_.base_url + ", chat=" + config_.chat_model + ", embed=" + config_.embedding_model + ")";
}

HttpOutcome OpenAiGateway::post_json(const std::string& path, const std::string& body) const {
  return send_with_retry(
      config_.retry,
      [&]() -> HttpOutcome {
        httplib::Client cli(origin_);
        auto secs = static_cast<time_t>(config_.timeout.count());
        cli.set_connection_timeout(secs);
        cli.set_read_timeout(secs);
        cli.set_write_timeout(secs);
        httplib::Headers headers;
        if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);
        auto res = cli.Post(path_base_ + path, headers, body, "application/json");
        if (!res) return {0, "", httplib::to_string(res.error())};
        return {res->status, res->body, ""};
      },
      sleep_);
}

std::string OpenAiGateway::complete(const ChatRequest& req) {
  json messages = json::array();
  if (!req.system.empty()) messages.push_back({{"role", "system"}, {"content", req.system}});
  messages.push_back({{"role", "user"}, {"content", req.user}});
  json payload = {{"model", config_.chat_model},
                  {"messages", messages},
                  {"temperature", req.temperature},
                  {"max_tokens", req.max_tokens}};
  auto res = post_json("/chat/completions", payload.dump());
  json j = json::parse(res.body, nullptr, false);
  if (j.is_discarded() || !j.contains("choices") || !j["choices"].is_array() || j["choices"].empty()) {
    throw GatewayError("malformed chat completion response", res.status);
  }
  const auto& msg = j["choices"][0].value("message", json::object());
  if (!msg.contains("content") || !msg["content"].is_string()) {
    throw GatewayError("chat completion response has no message content", res.status);
  }
  return msg["content"].get<std::string>();
}

std::vector<Embedding> OpenAiGateway::embed_request(const std::vector<std::string>& texts) {
  json payload = {{"model", config_.embedding_model}, {"input", texts}};
  auto res = post_json("/embeddings", payload.dump());
  json j = json::parse(res.body, nullptr, false);
  if (j.is_discarded() || !j.contains("data") || !j["data"].is_array()) {
    throw GatewayError("malformed embeddings response", res.status);
  }
  std::vector<Embedding> out(texts.size());
  std::size_t position = 0;
  for (const auto& item : j["data"]) {
    std::size_t idx = item.contains("index") && item["index"].is_number_unsigned() ? item["index"].get<std::size_t>()
                                                                                   : position;
    ++position;
    if (idx >= out.size() || !item.contains("embedding") || !item["embedding"].is_array()) {
      throw GatewayError("malformed embedding item", res.status);
    }
    for (const auto& x : item["embedding"]) out[idx].push_back(x.get<double>());
  }
  for (const auto& v : out) {
    if (v.empty()) throw GatewayError("embeddings response is missing vectors", res.status);
  }
  return out;
}

}  // namespace indexrag
