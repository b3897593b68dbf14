#include "indexrag/gateway.hpp"

#include <algorithm>

#include "indexrag/errors.hpp"

namespace indexrag {

using Clock = std::chrono::steady_clock;

void ChatRequest::validate() const {
  if (!(temperature >= 0.0)) throw InputError("temperature must be non-negative");
  if (max_tokens < 1) throw InputError("max_tokens must be at least 1");
}

void CallLedger::record_chat(std::chrono::nanoseconds elapsed) {
  std::lock_guard lock(mu_);
  wall_times_.push_back(elapsed);
  chat_calls_.fetch_add(1);
}

void CallLedger::record_embed(std::uint64_t requests, std::chrono::nanoseconds elapsed) {
  std::lock_guard lock(mu_);
  wall_times_.push_back(elapsed);
  embed_calls_.fetch_add(requests);
}

CallLedgerSnapshot CallLedger::snapshot() const {
  std::lock_guard lock(mu_);
  return {chat_calls_.load(), embed_calls_.load(), wall_times_};
}

std::string ModelGateway::chat_complete(const ChatRequest& req) {
  req.validate();
  auto start = Clock::now();
  std::string text = complete(req);
  ledger_.record_chat(Clock::now() - start);
  return text;
}

std::vector<Embedding> ModelGateway::embed_batch(const std::vector<std::string>& texts) {
  for (std::size_t i = 0; i < texts.size(); ++i) {
    if (texts[i].empty()) throw InputError("embedding input " + std::to_string(i) + " is empty");
  }
  std::vector<Embedding> out;
  out.reserve(texts.size());
  const std::size_t batch = std::max<std::size_t>(1, embed_batch_size());
  for (std::size_t begin = 0; begin < texts.size(); begin += batch) {
    std::size_t end = std::min(texts.size(), begin + batch);
    std::vector<std::string> chunk(texts.begin() + static_cast<std::ptrdiff_t>(begin),
                                   texts.begin() + static_cast<std::ptrdiff_t>(end));
    auto start = Clock::now();
    auto vectors = embed_request(chunk);
    ledger_.record_embed(1, Clock::now() - start);
    if (vectors.size() != chunk.size()) {
      throw GatewayError("embedding response has " + std::to_string(vectors.size()) + " vectors for " +
                         std::to_string(chunk.size()) + " inputs");
    }
    for (auto& v : vectors) {
      if (!out.empty() && v.size() != out.front().size()) throw GatewayError("embedding dimensions disagree");
      out.push_back(std::move(v));
    }
  }
  return out;
}

}  // namespace indexrag
