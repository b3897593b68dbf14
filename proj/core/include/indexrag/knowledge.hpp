#pragma once

// Corpus, extraction and index record types shared across the pipeline.

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace indexrag {

struct Document {
  std::string doc_id;
  std::string title;
  std::string text;

  /// Throws InputError when doc_id or text is empty.
  void validate() const;
};

/// Separator placed between facts when forming an AKU's merged text.
inline constexpr std::string_view kFactSeparator = ". ";

std::string join_facts(const std::vector<std::string>& facts);

/// Per-document retrievable unit: the retained answers of extraction, merged.
struct AtomicKnowledgeUnit {
  std::string doc_id;
  std::vector<std::string> facts;
  std::string merged_text;
  std::vector<std::string> entities;  // surface forms, deduplicated by normalized key

  /// Builds a unit whose merged_text is join_facts(facts). Empty entity strings are
  /// dropped and entities sharing a normalized key keep their first surface form.
  static AtomicKnowledgeUnit make(std::string doc_id, std::vector<std::string> facts,
                                  const std::vector<std::string>& entities = {});

  friend bool operator==(const AtomicKnowledgeUnit&, const AtomicKnowledgeUnit&) = default;
};

struct BridgingFact {
  std::string fact_id;
  std::string entity;  // normalized entity key
  std::string text;
  std::set<std::string> source_doc_ids;

  friend bool operator==(const BridgingFact&, const BridgingFact&) = default;
};

/// Trim, ASCII case-fold and collapse internal whitespace runs to a single space.
/// Throws InvalidEntityError when nothing is left after trimming.
std::string normalize_entity_key(std::string_view raw);

/// Same folding as normalize_entity_key but accepts empty input. Used to compare fact
/// text against entity keys.
std::string fold_text(std::string_view raw);

struct EntityRecord {
  std::string display;
  std::set<std::string> doc_ids;
};

/// Normalized entity key -> display form and the documents whose entity set contains it.
class EntityTable {
 public:
  /// Registers every entity of `doc_id`. Repeated mentions inside one document count once.
  void add_document(const std::string& doc_id, const std::vector<std::string>& entities);

  std::size_t document_frequency(std::string_view key) const;
  const EntityRecord* find(std::string_view key) const;
  const std::map<std::string, EntityRecord, std::less<>>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }

 private:
  std::map<std::string, EntityRecord, std::less<>> records_;
};

/// |{d : key in E_d}|, zero for an absent key.
std::size_t document_frequency(const EntityTable& table, std::string_view entity_key);

EntityTable build_entity_table(const std::vector<AtomicKnowledgeUnit>& akus);

enum class EntryKind { kAku, kBridging };

std::string_view to_string(EntryKind kind);
EntryKind entry_kind_from_string(std::string_view s);

using Embedding = std::vector<double>;

struct IndexEntry {
  std::string entry_id;
  EntryKind kind = EntryKind::kAku;
  std::string text;
  Embedding embedding;
  std::set<std::string> provenance;
  std::optional<std::string> entity;  // set iff kind == kBridging

  /// Throws InputError when provenance or entity disagree with kind.
  void validate() const;

  friend bool operator==(const IndexEntry&, const IndexEntry&) = default;
};

enum class Stage1Strategy { kQaExtraction, kSummary, kChunking };

std::string_view to_string(Stage1Strategy strategy);
Stage1Strategy stage1_strategy_from_string(std::string_view s);

struct IndexConfig {
  int tau = 10;
  int max_source_docs = 5;
  int max_facts_per_doc = 8;
  Stage1Strategy stage1_strategy = Stage1Strategy::kQaExtraction;
  int chunk_target_words = 100;
  int chunk_overlap_chars = 80;

  void validate() const;

  friend bool operator==(const IndexConfig&, const IndexConfig&) = default;
};

}  // namespace indexrag
