#include "indexrag/mock_gateway.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "indexrag/errors.hpp"

namespace indexrag {

using nlohmann::json;

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

Embedding hash_embedding(std::string_view text, std::size_t dim) {
  if (dim == 0) throw InputError("embedding dimension must be positive");
  Embedding v(dim, 0.0);
  bool any = false;
  std::string token;
  auto flush = [&] {
    if (token.empty()) return;
    std::uint64_t h = fnv1a64(token);
    v[h % dim] += (h >> 63) ? -1.0 : 1.0;
    any = true;
    token.clear();
  };
  for (char c : text) {
    auto uc = static_cast<unsigned char>(c);
    if (uc >= 0x80) {
      token.push_back(c);
    } else if (std::isalnum(uc)) {
      token.push_back(static_cast<char>(std::tolower(uc)));
    } else {
      flush();
    }
  }
  flush();
  bool nonzero = false;
  for (double x : v) nonzero = nonzero || x != 0.0;
  if (!any || !nonzero) {
    // Tokens can cancel out exactly; fall back to a one-hot vector.
    v.assign(dim, 0.0);
    v[fnv1a64(text) % dim] = 1.0;
  }
  return v;
}

PromptMatcher PromptMatcher::contains(std::vector<std::string> needles) {
  PromptMatcher m;
  m.description_ = "contains:";
  for (const auto& n : needles) m.description_ += " \"" + n + "\"";
  m.needles_ = std::move(needles);
  return m;
}

PromptMatcher PromptMatcher::regex(std::string pattern) {
  PromptMatcher m;
  try {
    m.regex_.emplace(pattern, std::regex::ECMAScript);
  } catch (const std::regex_error& e) {
    throw InputError("invalid mock regex '" + pattern + "': " + e.what());
  }
  m.description_ = "regex: " + pattern;
  return m;
}

bool PromptMatcher::matches(std::string_view text) const {
  if (regex_) return std::regex_search(text.begin(), text.end(), *regex_);
  for (const auto& n : needles_) {
    if (text.find(n) == std::string_view::npos) return false;
  }
  return true;
}

namespace {

PromptMatcher matcher_from_json(const json& j, const std::string& where) {
  if (j.contains("regex")) {
    if (!j["regex"].is_string()) throw InputError(where + ": regex must be a string");
    return PromptMatcher::regex(j["regex"].get<std::string>());
  }
  if (j.contains("contains")) {
    const auto& c = j["contains"];
    if (c.is_string()) return PromptMatcher::contains({c.get<std::string>()});
    if (c.is_array()) {
      std::vector<std::string> needles;
      for (const auto& n : c) {
        if (!n.is_string()) throw InputError(where + ": contains entries must be strings");
        needles.push_back(n.get<std::string>());
      }
      return PromptMatcher::contains(std::move(needles));
    }
  }
  throw InputError(where + ": rule needs a 'contains' or 'regex' matcher");
}

}  // namespace

MockScript MockScript::parse(std::string_view json_text) {
  json j = json::parse(json_text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw InputError("mock script is not a JSON object");
  MockScript s;
  if (j.contains("embedding_dim")) {
    if (!j["embedding_dim"].is_number_unsigned() || j["embedding_dim"].get<std::size_t>() == 0) {
      throw InputError("mock script embedding_dim must be a positive integer");
    }
    s.embedding_dim = j["embedding_dim"].get<std::size_t>();
  }
  if (j.contains("rules")) {
    if (!j["rules"].is_array()) throw InputError("mock script rules must be an array");
    std::size_t i = 0;
    for (const auto& r : j["rules"]) {
      std::string where = "mock rule " + std::to_string(i++);
      if (!r.is_object() || !r.contains("response") || !r["response"].is_string()) {
        throw InputError(where + ": needs a string response");
      }
      s.rules.push_back({matcher_from_json(r, where), r["response"].get<std::string>()});
    }
  }
  if (j.contains("default_response")) {
    if (!j["default_response"].is_string()) throw InputError("mock default_response must be a string");
    s.default_response = j["default_response"].get<std::string>();
  }
  if (j.contains("embedding_rules")) {
    std::size_t i = 0;
    for (const auto& r : j["embedding_rules"]) {
      std::string where = "mock embedding rule " + std::to_string(i++);
      if (!r.is_object() || !r.contains("vector") || !r["vector"].is_array()) {
        throw InputError(where + ": needs a vector");
      }
      Embedding v;
      for (const auto& x : r["vector"]) {
        if (!x.is_number()) throw InputError(where + ": vector entries must be numbers");
        v.push_back(x.get<double>());
      }
      if (v.size() != s.embedding_dim) throw InputError(where + ": vector length differs from embedding_dim");
      s.embedding_rules.push_back({matcher_from_json(r, where), std::move(v)});
    }
  }
  return s;
}

MockScript MockScript::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw PersistenceError("cannot open mock script " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

MockGateway::MockGateway(MockScript script) : script_(std::move(script)) {}

std::string MockGateway::describe() const {
  return "mock(dim=" + std::to_string(script_.embedding_dim) + ", rules=" + std::to_string(script_.rules.size()) +
         ")";
}

std::string MockGateway::complete(const ChatRequest& req) {
  std::string prompt = req.system.empty() ? req.user : req.system + "\n\n" + req.user;
  for (const auto& rule : script_.rules) {
    if (rule.matcher.matches(prompt)) return rule.response;
  }
  if (script_.default_response) return *script_.default_response;
  throw GatewayError("mock script has no rule matching the prompt: " + prompt.substr(0, 120));
}

std::vector<Embedding> MockGateway::embed_request(const std::vector<std::string>& texts) {
  std::vector<Embedding> out;
  out.reserve(texts.size());
  for (const auto& t : texts) {
    const MockEmbeddingRule* hit = nullptr;
    for (const auto& r : script_.embedding_rules) {
      if (r.matcher.matches(t)) {
        hit = &r;
        break;
      }
    }
    out.push_back(hit ? hit->vector : hash_embedding(t, script_.embedding_dim));
  }
  return out;
}

}  // namespace indexrag
