#include "indexrag/knowledge.hpp"

#include <cctype>
#include <utility>

#include "indexrag/errors.hpp"

namespace indexrag {

void Document::validate() const {
  if (doc_id.empty()) throw InputError("document has an empty doc_id");
  if (text.empty()) throw InputError("document '" + doc_id + "' has empty text");
}

std::string join_facts(const std::vector<std::string>& facts) {
  std::string out;
  for (std::size_t i = 0; i < facts.size(); ++i) {
    if (i > 0) out += kFactSeparator;
    out += facts[i];
  }
  return out;
}

AtomicKnowledgeUnit AtomicKnowledgeUnit::make(std::string doc_id, std::vector<std::string> facts,
                                              const std::vector<std::string>& entities) {
  AtomicKnowledgeUnit aku;
  aku.doc_id = std::move(doc_id);
  aku.merged_text = join_facts(facts);
  aku.facts = std::move(facts);
  std::set<std::string> seen;
  for (const auto& e : entities) {
    std::string key = fold_text(e);
    if (key.empty() || !seen.insert(key).second) continue;
    aku.entities.push_back(e);
  }
  return aku;
}

std::string fold_text(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  bool pending_space = false;
  for (char c : raw) {
    auto uc = static_cast<unsigned char>(c);
    if (std::isspace(uc)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.push_back(uc < 0x80 ? static_cast<char>(std::tolower(uc)) : c);
  }
  return out;
}

std::string normalize_entity_key(std::string_view raw) {
  std::string key = fold_text(raw);
  if (key.empty()) throw InvalidEntityError("entity is empty after trimming");
  return key;
}

void EntityTable::add_document(const std::string& doc_id, const std::vector<std::string>& entities) {
  for (const auto& surface : entities) {
    std::string key = fold_text(surface);
    if (key.empty()) continue;
    auto [it, inserted] = records_.try_emplace(key);
    // Smallest surface form wins so the display is independent of insertion order.
    if (inserted || surface < it->second.display) it->second.display = surface;
    it->second.doc_ids.insert(doc_id);
  }
}

std::size_t EntityTable::document_frequency(std::string_view key) const {
  auto it = records_.find(key);
  return it == records_.end() ? 0 : it->second.doc_ids.size();
}

const EntityRecord* EntityTable::find(std::string_view key) const {
  auto it = records_.find(key);
  return it == records_.end() ? nullptr : &it->second;
}

std::size_t document_frequency(const EntityTable& table, std::string_view entity_key) {
  return table.document_frequency(entity_key);
}

EntityTable build_entity_table(const std::vector<AtomicKnowledgeUnit>& akus) {
  EntityTable table;
  for (const auto& aku : akus) table.add_document(aku.doc_id, aku.entities);
  return table;
}

std::string_view to_string(EntryKind kind) {
  return kind == EntryKind::kAku ? "aku" : "bridging";
}

EntryKind entry_kind_from_string(std::string_view s) {
  if (s == "aku") return EntryKind::kAku;
  if (s == "bridging") return EntryKind::kBridging;
  throw InputError("unknown entry kind '" + std::string(s) + "'");
}

void IndexEntry::validate() const {
  if (entry_id.empty()) throw InputError("index entry has an empty entry_id");
  if (kind == EntryKind::kAku) {
    if (provenance.size() != 1) throw InputError("aku entry '" + entry_id + "' must have exactly one source");
    if (entity) throw InputError("aku entry '" + entry_id + "' must not carry an entity");
  } else {
    if (provenance.size() < 2) throw InputError("bridging entry '" + entry_id + "' needs at least two sources");
    if (!entity || entity->empty()) throw InputError("bridging entry '" + entry_id + "' has no entity");
  }
}

std::string_view to_string(Stage1Strategy strategy) {
  switch (strategy) {
    case Stage1Strategy::kQaExtraction: return "qa_extraction";
    case Stage1Strategy::kSummary: return "summary";
    case Stage1Strategy::kChunking: return "chunking";
  }
  return "qa_extraction";
}

Stage1Strategy stage1_strategy_from_string(std::string_view s) {
  if (s == "qa_extraction" || s == "qa") return Stage1Strategy::kQaExtraction;
  if (s == "summary") return Stage1Strategy::kSummary;
  if (s == "chunking") return Stage1Strategy::kChunking;
  throw InputError("unknown stage-1 strategy '" + std::string(s) + "'");
}

void IndexConfig::validate() const {
  if (tau < 2) throw InputError("tau must be at least 2");
  if (max_source_docs < 1) throw InputError("max_source_docs must be at least 1");
  if (max_facts_per_doc < 1) throw InputError("max_facts_per_doc must be at least 1");
  if (chunk_target_words < 1) throw InputError("chunk_target_words must be at least 1");
  if (chunk_overlap_chars < 0) throw InputError("chunk_overlap_chars must be non-negative");
}

}  // namespace indexrag
