#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <regex>
#include <string>
#include <string_view>
#include <vector>

#include "indexrag/gateway.hpp"

namespace indexrag {

std::uint64_t fnv1a64(std::string_view bytes);

/// Signed feature hashing of lowercase word tokens (runs of ASCII alphanumerics or non-ASCII
/// bytes). Each token adds +1 or -1 (sign from the top hash bit) at index hash % dim. Text
/// without tokens gets a one-hot vector at fnv1a64(text) % dim so the result is never zero.
Embedding hash_embedding(std::string_view text, std::size_t dim);

/// Substring (all listed strings present) or ECMAScript regex search over a prompt.
class PromptMatcher {
 public:
  static PromptMatcher contains(std::vector<std::string> needles);
  static PromptMatcher regex(std::string pattern);

  bool matches(std::string_view text) const;
  const std::string& description() const { return description_; }

 private:
  std::vector<std::string> needles_;
  std::optional<std::regex> regex_;
  std::string description_;
};

struct MockRule {
  PromptMatcher matcher;
  std::string response;
};

struct MockEmbeddingRule {
  PromptMatcher matcher;
  Embedding vector;
};

/// Ordered matcher rules for chat, optional scripted vectors for embeddings, hash fallback.
///
/// JSON form:
///   {"embedding_dim": 64,
///    "rules": [{"contains": "..." | ["...", ...], "response": "..."}, {"regex": "...", "response": "..."}],
///    "default_response": "...",
///    "embedding_rules": [{"contains": "...", "vector": [...]}]}
struct MockScript {
  std::vector<MockRule> rules;
  std::optional<std::string> default_response;
  std::size_t embedding_dim = 64;
  std::vector<MockEmbeddingRule> embedding_rules;

  static MockScript parse(std::string_view json_text);
  static MockScript load(const std::filesystem::path& path);
};

/// Deterministic offline gateway. Chat responses come from the first rule matching the
/// prompt; no match and no default is a GatewayError.
class MockGateway final : public ModelGateway {
 public:
  explicit MockGateway(MockScript script);

  std::string describe() const override;
  std::size_t dimension() const { return script_.embedding_dim; }

 protected:
  std::string complete(const ChatRequest& req) override;
  std::vector<Embedding> embed_request(const std::vector<std::string>& texts) override;

 private:
  MockScript script_;
};

}  // namespace indexrag
