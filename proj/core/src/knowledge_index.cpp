#include "indexrag/knowledge_index.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "indexrag/errors.hpp"

namespace indexrag {

using nlohmann::json;

namespace {

constexpr int kKnowledgeVersion = 1;

json config_to_json(const IndexConfig& c) {
  return {{"tau", c.tau},
          {"max_source_docs", c.max_source_docs},
          {"max_facts_per_doc", c.max_facts_per_doc},
          {"stage1_strategy", to_string(c.stage1_strategy)},
          {"chunk_target_words", c.chunk_target_words},
          {"chunk_overlap_chars", c.chunk_overlap_chars}};
}

IndexConfig config_from_json(const json& j) {
  IndexConfig c;
  c.tau = j.value("tau", c.tau);
  c.max_source_docs = j.value("max_source_docs", c.max_source_docs);
  c.max_facts_per_doc = j.value("max_facts_per_doc", c.max_facts_per_doc);
  c.stage1_strategy = stage1_strategy_from_string(j.value("stage1_strategy", std::string("qa_extraction")));
  c.chunk_target_words = j.value("chunk_target_words", c.chunk_target_words);
  c.chunk_overlap_chars = j.value("chunk_overlap_chars", c.chunk_overlap_chars);
  c.validate();
  return c;
}

void write_json(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw PersistenceError("cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw PersistenceError("failed writing " + path.string());
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw PersistenceError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  json j = json::parse(ss.str(), nullptr, false);
  if (j.is_discarded()) throw PersistenceError(path.string() + " is not valid JSON");
  return j;
}

}  // namespace

std::string aku_entry_id(const std::string& doc_id) { return "aku:" + doc_id; }

std::string chunk_entry_id(const std::string& doc_id, std::size_t chunk) {
  return "chunk:" + doc_id + ":" + std::to_string(chunk);
}

std::string bridging_fact_id(const std::string& entity_key, std::size_t ordinal) {
  return "bridge:" + entity_key + ":" + std::to_string(ordinal);
}

IndexStats KnowledgeIndex::stats() const {
  IndexStats s;
  s.document_count = documents.size();
  for (const auto& [id, record] : documents) s.aku_count += record.units.size();
  std::size_t non_empty = 0;
  for (const auto& [key, facts] : bridging) {
    ++s.bridge_entity_count;
    s.bridging_fact_count += facts.size();
    if (!facts.empty()) ++non_empty;
  }
  s.non_empty_rate =
      s.bridge_entity_count == 0 ? 0.0 : static_cast<double>(non_empty) / static_cast<double>(s.bridge_entity_count);
  return s;
}

void KnowledgeIndex::save(const std::filesystem::path& dir) const {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw PersistenceError("cannot create index directory " + dir.string() + ": " + ec.message());

  store.save(store_path(dir));

  json docs = json::array();
  for (const auto& [id, record] : documents) {
    json units = json::array();
    for (const auto& u : record.units) {
      units.push_back({{"facts", u.facts}, {"merged_text", u.merged_text}, {"entities", u.entities}});
    }
    docs.push_back({{"doc_id", id}, {"title", record.title}, {"units", units}});
  }
  json bridges = json::array();
  for (const auto& [key, facts] : bridging) {
    json list = json::array();
    for (const auto& f : facts) {
      list.push_back({{"fact_id", f.fact_id}, {"text", f.text}, {"source_doc_ids", f.source_doc_ids}});
    }
    bridges.push_back({{"entity", key}, {"facts", list}});
  }
  write_json(knowledge_path(dir),
             {{"version", kKnowledgeVersion}, {"config", config_to_json(config)}, {"documents", docs}, {"bridging", bridges}});

  auto s = stats();
  write_json(stats_path(dir), {{"document_count", s.document_count},
                               {"aku_count", s.aku_count},
                               {"bridge_entity_count", s.bridge_entity_count},
                               {"bridging_fact_count", s.bridging_fact_count},
                               {"non_empty_rate", s.non_empty_rate}});
}

KnowledgeIndex KnowledgeIndex::load(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw PersistenceError("index directory " + dir.string() + " does not exist");
  json k = read_json(knowledge_path(dir));
  if (k.value("version", -1) != kKnowledgeVersion) {
    throw PersistenceError("unsupported knowledge file version in " + dir.string());
  }
  KnowledgeIndex index;
  try {
    index.config = config_from_json(k.at("config"));
    for (const auto& d : k.at("documents")) {
      DocumentRecord record;
      auto doc_id = d.at("doc_id").get<std::string>();
      record.title = d.value("title", std::string());
      for (const auto& u : d.at("units")) {
        auto unit = AtomicKnowledgeUnit::make(doc_id, u.at("facts").get<std::vector<std::string>>(),
                                              u.at("entities").get<std::vector<std::string>>());
        if (unit.merged_text != u.value("merged_text", unit.merged_text)) {
          throw PersistenceError("merged_text of '" + doc_id + "' does not match its facts");
        }
        index.entities.add_document(doc_id, unit.entities);
        record.units.push_back(std::move(unit));
      }
      index.documents.emplace(doc_id, std::move(record));
    }
    for (const auto& b : k.at("bridging")) {
      auto key = b.at("entity").get<std::string>();
      std::vector<BridgingFact> facts;
      for (const auto& f : b.at("facts")) {
        facts.push_back({f.at("fact_id").get<std::string>(), key, f.at("text").get<std::string>(),
                         f.at("source_doc_ids").get<std::set<std::string>>()});
      }
      index.bridging.emplace(key, std::move(facts));
    }
  } catch (const PersistenceError&) {
    throw;
  } catch (const std::exception& e) {
    throw PersistenceError("malformed knowledge file in " + dir.string() + ": " + e.what());
  }
  index.store = VectorStore::load(store_path(dir));
  return index;
}

}  // namespace indexrag
