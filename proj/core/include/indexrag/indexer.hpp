#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "indexrag/gateway.hpp"
#include "indexrag/knowledge.hpp"
#include "indexrag/knowledge_index.hpp"

namespace indexrag {

struct IndexerOptions {
  int parallelism = 4;                    // concurrent model calls in Stage 1 and Stage 2
  std::size_t max_document_chars = 24000; // longer documents are truncated before extraction
  int indexing_max_tokens = kIndexingMaxTokens;
};

struct Stage1Result {
  AtomicKnowledgeUnit aku;
  std::string raw_response;
};

/// Prompts for atomic QA pairs plus an entity list and keeps only the answers as facts.
/// Throws ExtractionError when the reply is not JSON (after one repair pass) or has no answers.
Stage1Result extract_qa(const Document& doc, ModelGateway& gateway, const IndexerOptions& options = {});

/// Single fact holding the model's summary; no entities. Throws ExtractionError when empty.
Stage1Result extract_summary(const Document& doc, ModelGateway& gateway, const IndexerOptions& options = {});

/// Parses a Stage-1 QA reply. Exposed for testing.
AtomicKnowledgeUnit parse_qa_response(const std::string& doc_id, std::string_view raw);

struct BridgeEntity {
  std::string key;
  std::string display;
  std::vector<std::string> doc_ids;  // D_e in doc_id order

  friend bool operator==(const BridgeEntity&, const BridgeEntity&) = default;
};

using BridgeEntitySet = std::vector<BridgeEntity>;  // ordered by key

/// Entities with 2 <= df(e) <= tau. Throws InputError when tau < 2.
BridgeEntitySet identify_bridge_entities(const EntityTable& table, int tau);

/// Facts of `aku` whose folded text contains `entity_key`, in extraction order.
std::vector<std::string> collect_entity_facts(const AtomicKnowledgeUnit& aku, std::string_view entity_key);

struct SourceDocument {
  std::string doc_id;
  std::string title;
  const AtomicKnowledgeUnit* aku = nullptr;
};

struct BridgePrompt {
  std::string prompt;
  std::vector<std::string> doc_ids;  // documents shown, in section order
};

/// Chooses up to max_source_docs documents with the most matching facts (ties by doc_id),
/// keeps the first max_facts_per_doc matching facts of each and renders the bridging prompt.
/// Documents with no matching fact are left out. doc_ids has fewer than two members when there
/// is nothing to bridge.
BridgePrompt build_bridge_prompt(const BridgeEntity& entity, std::span<const SourceDocument> docs,
                                 const IndexConfig& config);

/// Parses a JSON array of strings from a Stage-2 reply (one repair pass). Empty and duplicate
/// strings are dropped. Throws ExtractionError when unparseable.
std::vector<std::string> parse_bridge_response(std::string_view raw);

/// One model call per entity with at least two contributing documents; zero calls otherwise.
std::vector<BridgingFact> generate_bridging_facts(const BridgeEntity& entity, std::span<const SourceDocument> docs,
                                                  const IndexConfig& config, ModelGateway& gateway,
                                                  const IndexerOptions& options = {});

/// Runs Stage 1 over the corpus, selects bridge entities, runs Stage 2 and embeds every AKU
/// and bridging fact into one store. Items that fail are skipped with a warning; throws
/// ExtractionError only when no document extracts.
KnowledgeIndex build_index(const std::vector<Document>& corpus, const IndexConfig& config, ModelGateway& gateway,
                           const IndexerOptions& options = {});

struct AddReport {
  std::vector<std::string> newly_bridged;  // entities that became bridge entities
  std::vector<std::string> rebridged;      // existing bridge entities regenerated
  std::vector<std::string> dropped;        // entities whose df now exceeds tau
  std::size_t entries_added = 0;
  std::size_t entries_removed = 0;
};

/// Stage 1 for `doc` only, then Stage 2 for the entities it touches. Throws InputError for a
/// duplicate doc_id and ExtractionError when the document cannot be extracted.
AddReport add_document(KnowledgeIndex& index, const Document& doc, ModelGateway& gateway,
                       const IndexerOptions& options = {});

/// Empty index carrying `config`, ready for add_document.
KnowledgeIndex make_empty_index(const IndexConfig& config);

}  // namespace indexrag
