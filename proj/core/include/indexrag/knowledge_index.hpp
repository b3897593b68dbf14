#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "indexrag/knowledge.hpp"
#include "indexrag/vector_store.hpp"

namespace indexrag {

struct IndexStats {
  std::size_t document_count = 0;
  std::size_t aku_count = 0;
  std::size_t bridge_entity_count = 0;
  std::size_t bridging_fact_count = 0;
  double non_empty_rate = 0.0;  // bridge entities with >= 1 fact / bridge entities; 0 when none

  friend bool operator==(const IndexStats&, const IndexStats&) = default;
};

struct DocumentRecord {
  std::string title;
  std::vector<AtomicKnowledgeUnit> units;  // one unit, or one per chunk

  friend bool operator==(const DocumentRecord&, const DocumentRecord&) = default;
};

/// Everything the offline phase produced: extraction results, the entity table, bridging
/// facts by entity and the unified vector store.
struct KnowledgeIndex {
  IndexConfig config;
  std::map<std::string, DocumentRecord> documents;
  EntityTable entities;
  std::map<std::string, std::vector<BridgingFact>> bridging;  // every current bridge entity has a slot
  VectorStore store;

  IndexStats stats() const;

  /// Writes store.jsonl, knowledge.json and stats.json into `dir` (created if missing).
  void save(const std::filesystem::path& dir) const;
  static KnowledgeIndex load(const std::filesystem::path& dir);

  static std::filesystem::path store_path(const std::filesystem::path& dir) { return dir / "store.jsonl"; }
  static std::filesystem::path stats_path(const std::filesystem::path& dir) { return dir / "stats.json"; }
  static std::filesystem::path knowledge_path(const std::filesystem::path& dir) { return dir / "knowledge.json"; }
};

std::string aku_entry_id(const std::string& doc_id);
std::string chunk_entry_id(const std::string& doc_id, std::size_t chunk);
std::string bridging_fact_id(const std::string& entity_key, std::size_t ordinal);

}  // namespace indexrag
