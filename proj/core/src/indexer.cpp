#include "indexrag/indexer.hpp"

#include <algorithm>
#include <optional>
#include <set>

#include <spdlog/spdlog.h>

#include "indexrag/chunker.hpp"
#include "indexrag/errors.hpp"
#include "indexrag/prompts.hpp"
#include "json_extract.hpp"
#include "parallel.hpp"

namespace indexrag {

using nlohmann::json;

namespace {

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

// Cut at `limit` bytes without splitting a UTF-8 sequence.
std::string truncate_utf8(const std::string& s, std::size_t limit) {
  if (s.size() <= limit) return s;
  std::size_t cut = limit;
  while (cut > 0 && (static_cast<unsigned char>(s[cut]) & 0xC0) == 0x80) --cut;
  return s.substr(0, cut);
}

std::string document_prompt_text(const Document& doc, const IndexerOptions& options) {
  std::string text = doc.title.empty() ? doc.text : doc.title + "\n" + doc.text;
  if (text.size() > options.max_document_chars) {
    spdlog::warn("document '{}' truncated from {} to {} characters for extraction", doc.doc_id, text.size(),
                 options.max_document_chars);
    text = truncate_utf8(text, options.max_document_chars);
  }
  return text;
}

std::string clean_answer(const json& value) {
  std::string a;
  if (value.is_string()) {
    a = trim(value.get<std::string>());
  } else if (value.is_number() || value.is_boolean()) {
    a = value.dump();
  }
  if (!a.empty() && a.back() == '.') a.pop_back();
  return trim(a);
}

void collect_pairs(const json& pairs, std::vector<std::string>& facts) {
  for (const auto& p : pairs) {
    if (p.is_object()) {
      for (const char* key : {"answer", "a", "Answer"}) {
        if (p.contains(key)) {
          if (auto a = clean_answer(p[key]); !a.empty()) facts.push_back(std::move(a));
          break;
        }
      }
    } else if (p.is_array() && p.size() >= 2) {
      if (auto a = clean_answer(p[1]); !a.empty()) facts.push_back(std::move(a));
    }
  }
}

std::vector<std::string> collect_entities(const json& list) {
  std::vector<std::string> out;
  if (!list.is_array()) return out;
  for (const auto& e : list) {
    if (e.is_string()) {
      out.push_back(trim(e.get<std::string>()));
    } else if (e.is_object() && e.contains("name") && e["name"].is_string()) {
      out.push_back(trim(e["name"].get<std::string>()));
    }
  }
  std::erase_if(out, [](const std::string& s) { return s.empty(); });
  return out;
}

std::vector<Stage1Result> run_stage1(const Document& doc, const IndexConfig& config, ModelGateway& gateway,
                                     const IndexerOptions& options) {
  switch (config.stage1_strategy) {
    case Stage1Strategy::kQaExtraction: return {extract_qa(doc, gateway, options)};
    case Stage1Strategy::kSummary: return {extract_summary(doc, gateway, options)};
    case Stage1Strategy::kChunking: {
      std::vector<Stage1Result> out;
      for (auto& unit : chunk_document(doc, config.chunk_target_words, config.chunk_overlap_chars)) {
        out.push_back({std::move(unit), {}});
      }
      return out;
    }
  }
  return {};
}

std::vector<IndexEntry> unit_entries(const DocumentRecord& record, Stage1Strategy strategy) {
  std::vector<IndexEntry> out;
  for (std::size_t i = 0; i < record.units.size(); ++i) {
    const auto& unit = record.units[i];
    IndexEntry e;
    e.entry_id = strategy == Stage1Strategy::kChunking ? chunk_entry_id(unit.doc_id, i) : aku_entry_id(unit.doc_id);
    e.kind = EntryKind::kAku;
    e.text = unit.merged_text;
    e.provenance = {unit.doc_id};
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<IndexEntry> bridging_entries(const std::vector<BridgingFact>& facts) {
  std::vector<IndexEntry> out;
  for (const auto& f : facts) {
    IndexEntry e;
    e.entry_id = f.fact_id;
    e.kind = EntryKind::kBridging;
    e.text = f.text;
    e.provenance = f.source_doc_ids;
    e.entity = f.entity;
    out.push_back(std::move(e));
  }
  return out;
}

void embed_into(std::vector<IndexEntry>& entries, ModelGateway& gateway) {
  std::vector<std::string> texts;
  texts.reserve(entries.size());
  for (const auto& e : entries) texts.push_back(e.text);
  auto vectors = gateway.embed_batch(texts);
  for (std::size_t i = 0; i < entries.size(); ++i) entries[i].embedding = std::move(vectors[i]);
}

std::vector<SourceDocument> sources_for(const BridgeEntity& entity, const KnowledgeIndex& index) {
  std::vector<SourceDocument> docs;
  for (const auto& id : entity.doc_ids) {
    auto it = index.documents.find(id);
    if (it == index.documents.end() || it->second.units.empty()) continue;
    docs.push_back({id, it->second.title, &it->second.units.front()});
  }
  return docs;
}

// Stage 2 for each entity with bounded parallelism. Failures count as empty.
std::vector<std::vector<BridgingFact>> run_stage2(const BridgeEntitySet& entities, const KnowledgeIndex& index,
                                                  ModelGateway& gateway, const IndexerOptions& options) {
  std::vector<std::vector<BridgingFact>> results(entities.size());
  detail::parallel_for(entities.size(), options.parallelism, [&](std::size_t i) {
    auto docs = sources_for(entities[i], index);
    try {
      results[i] = generate_bridging_facts(entities[i], docs, index.config, gateway, options);
    } catch (const ExtractionError& e) {
      spdlog::warn("bridge entity '{}' skipped: {}", entities[i].key, e.what());
    } catch (const GatewayError& e) {
      spdlog::warn("bridge entity '{}' skipped: {}", entities[i].key, e.what());
    }
  });
  return results;
}

}  // namespace

AtomicKnowledgeUnit parse_qa_response(const std::string& doc_id, std::string_view raw) {
  auto parsed = detail::parse_model_json(raw);
  if (!parsed) throw ExtractionError("document '" + doc_id + "': extraction reply is not valid JSON");
  const json& j = *parsed;

  std::vector<std::string> facts;
  std::vector<std::string> entities;
  if (j.is_array()) {
    collect_pairs(j, facts);
  } else if (j.is_object()) {
    bool found_list = false;
    for (const char* key : {"qa_pairs", "pairs", "questions", "qa", "facts"}) {
      if (j.contains(key) && j[key].is_array()) {
        collect_pairs(j[key], facts);
        found_list = true;
        break;
      }
    }
    if (!found_list) {
      // {"question": "answer", ...} form.
      for (const auto& [question, answer] : j.items()) {
        if (question == "entities") continue;
        if (auto a = clean_answer(answer); !a.empty()) facts.push_back(std::move(a));
      }
    }
    if (j.contains("entities")) entities = collect_entities(j["entities"]);
  } else {
    throw ExtractionError("document '" + doc_id + "': extraction reply is neither object nor array");
  }
  if (facts.empty()) throw ExtractionError("document '" + doc_id + "': extraction produced no facts");
  return AtomicKnowledgeUnit::make(doc_id, std::move(facts), entities);
}

Stage1Result extract_qa(const Document& doc, ModelGateway& gateway, const IndexerOptions& options) {
  doc.validate();
  ChatRequest req;
  req.user = render_prompt(TemplateId::kStage1Qa, {{"text", document_prompt_text(doc, options)}});
  req.max_tokens = options.indexing_max_tokens;
  std::string raw = gateway.chat_complete(req);
  return {parse_qa_response(doc.doc_id, raw), raw};
}

Stage1Result extract_summary(const Document& doc, ModelGateway& gateway, const IndexerOptions& options) {
  doc.validate();
  ChatRequest req;
  req.user = render_prompt(TemplateId::kStage1Summary, {{"text", document_prompt_text(doc, options)}});
  req.max_tokens = options.indexing_max_tokens;
  std::string raw = gateway.chat_complete(req);
  std::string summary = trim(raw);
  if (summary.empty()) throw ExtractionError("document '" + doc.doc_id + "': empty summary");
  return {AtomicKnowledgeUnit::make(doc.doc_id, {summary}), raw};
}

BridgeEntitySet identify_bridge_entities(const EntityTable& table, int tau) {
  if (tau < 2) throw InputError("tau must be at least 2");
  BridgeEntitySet out;
  for (const auto& [key, record] : table.records()) {
    auto df = record.doc_ids.size();
    if (df >= 2 && df <= static_cast<std::size_t>(tau)) {
      out.push_back({key, record.display, {record.doc_ids.begin(), record.doc_ids.end()}});
    }
  }
  return out;
}

std::vector<std::string> collect_entity_facts(const AtomicKnowledgeUnit& aku, std::string_view entity_key) {
  std::vector<std::string> out;
  if (entity_key.empty()) return out;
  for (const auto& fact : aku.facts) {
    if (fold_text(fact).find(entity_key) != std::string::npos) out.push_back(fact);
  }
  return out;
}

BridgePrompt build_bridge_prompt(const BridgeEntity& entity, std::span<const SourceDocument> docs,
                                 const IndexConfig& config) {
  struct Candidate {
    const SourceDocument* doc;
    std::vector<std::string> facts;
  };
  std::vector<Candidate> candidates;
  for (const auto& d : docs) {
    if (!d.aku) continue;
    auto facts = collect_entity_facts(*d.aku, entity.key);
    if (!facts.empty()) candidates.push_back({&d, std::move(facts)});
  }
  std::stable_sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    if (a.facts.size() != b.facts.size()) return a.facts.size() > b.facts.size();
    return a.doc->doc_id < b.doc->doc_id;
  });
  if (candidates.size() > static_cast<std::size_t>(config.max_source_docs)) {
    candidates.resize(static_cast<std::size_t>(config.max_source_docs));
  }
  std::sort(candidates.begin(), candidates.end(),
            [](const Candidate& a, const Candidate& b) { return a.doc->doc_id < b.doc->doc_id; });

  BridgePrompt out;
  std::string sections;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const auto& c = candidates[i];
    if (i > 0) sections += "\n\n";
    sections += "Document " + std::to_string(i + 1) + ": " + (c.doc->title.empty() ? c.doc->doc_id : c.doc->title);
    auto n = std::min(c.facts.size(), static_cast<std::size_t>(config.max_facts_per_doc));
    for (std::size_t f = 0; f < n; ++f) sections += "\n- " + c.facts[f];
    out.doc_ids.push_back(c.doc->doc_id);
  }
  const std::string& name = entity.display.empty() ? entity.key : entity.display;
  out.prompt = render_prompt(TemplateId::kStage2Bridge, {{"entity", name}, {"doc_sections", sections}});
  return out;
}

std::vector<std::string> parse_bridge_response(std::string_view raw) {
  auto parsed = detail::parse_model_json(raw);
  if (!parsed) throw ExtractionError("bridging reply is not valid JSON");
  const json* list = &*parsed;
  if (parsed->is_object()) {
    // Tolerate {"bridging_facts": [...]} style wrappers.
    list = nullptr;
    for (const auto& [key, value] : parsed->items()) {
      if (value.is_array()) {
        list = &value;
        break;
      }
    }
    if (!list) throw ExtractionError("bridging reply has no array");
  }
  if (!list->is_array()) throw ExtractionError("bridging reply is not a JSON array");
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto& item : *list) {
    if (!item.is_string()) continue;
    std::string text = trim(item.get<std::string>());
    if (text.empty() || !seen.insert(text).second) continue;
    out.push_back(std::move(text));
  }
  return out;
}

std::vector<BridgingFact> generate_bridging_facts(const BridgeEntity& entity, std::span<const SourceDocument> docs,
                                                  const IndexConfig& config, ModelGateway& gateway,
                                                  const IndexerOptions& options) {
  if (docs.size() < 2) throw InputError("bridge entity '" + entity.key + "' needs at least two documents");
  auto prompt = build_bridge_prompt(entity, docs, config);
  if (prompt.doc_ids.size() < 2) return {};

  ChatRequest req;
  req.user = prompt.prompt;
  req.max_tokens = options.indexing_max_tokens;
  auto texts = parse_bridge_response(gateway.chat_complete(req));

  std::set<std::string> provenance(prompt.doc_ids.begin(), prompt.doc_ids.end());
  std::vector<BridgingFact> facts;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    facts.push_back({bridging_fact_id(entity.key, i), entity.key, std::move(texts[i]), provenance});
  }
  return facts;
}

KnowledgeIndex make_empty_index(const IndexConfig& config) {
  config.validate();
  KnowledgeIndex index;
  index.config = config;
  return index;
}

KnowledgeIndex build_index(const std::vector<Document>& corpus, const IndexConfig& config, ModelGateway& gateway,
                           const IndexerOptions& options) {
  KnowledgeIndex index = make_empty_index(config);
  if (corpus.empty()) throw InputError("cannot build an index from an empty corpus");
  std::set<std::string> ids;
  for (const auto& d : corpus) {
    d.validate();
    if (!ids.insert(d.doc_id).second) throw InputError("duplicate doc_id '" + d.doc_id + "'");
  }

  std::vector<std::optional<DocumentRecord>> stage1(corpus.size());
  detail::parallel_for(corpus.size(), options.parallelism, [&](std::size_t i) {
    try {
      DocumentRecord record{corpus[i].title, {}};
      for (auto& r : run_stage1(corpus[i], config, gateway, options)) record.units.push_back(std::move(r.aku));
      stage1[i] = std::move(record);
    } catch (const ExtractionError& e) {
      spdlog::warn("document '{}' skipped: {}", corpus[i].doc_id, e.what());
    } catch (const GatewayError& e) {
      spdlog::warn("document '{}' skipped: {}", corpus[i].doc_id, e.what());
    }
  });

  std::vector<IndexEntry> entries;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (!stage1[i]) continue;
    auto& record = *stage1[i];
    for (auto& e : unit_entries(record, config.stage1_strategy)) entries.push_back(std::move(e));
    for (const auto& unit : record.units) index.entities.add_document(unit.doc_id, unit.entities);
    index.documents.emplace(corpus[i].doc_id, std::move(record));
  }
  if (index.documents.empty()) throw ExtractionError("no document could be extracted");

  auto bridge_set = identify_bridge_entities(index.entities, config.tau);
  auto generated = run_stage2(bridge_set, index, gateway, options);
  for (std::size_t i = 0; i < bridge_set.size(); ++i) {
    for (auto& e : bridging_entries(generated[i])) entries.push_back(std::move(e));
    index.bridging.emplace(bridge_set[i].key, std::move(generated[i]));
  }

  embed_into(entries, gateway);
  index.store.upsert(std::move(entries));
  return index;
}

AddReport add_document(KnowledgeIndex& index, const Document& doc, ModelGateway& gateway,
                       const IndexerOptions& options) {
  doc.validate();
  if (index.documents.count(doc.doc_id)) throw InputError("doc_id '" + doc.doc_id + "' is already indexed");

  DocumentRecord record{doc.title, {}};
  for (auto& r : run_stage1(doc, index.config, gateway, options)) record.units.push_back(std::move(r.aku));

  AddReport report;
  auto entries = unit_entries(record, index.config.stage1_strategy);
  embed_into(entries, gateway);
  report.entries_added += entries.size();
  index.store.upsert(std::move(entries));

  std::set<std::string> touched;
  for (const auto& unit : record.units) {
    index.entities.add_document(unit.doc_id, unit.entities);
    for (const auto& e : unit.entities) touched.insert(fold_text(e));
  }
  index.documents.emplace(doc.doc_id, std::move(record));

  const auto tau = static_cast<std::size_t>(index.config.tau);
  BridgeEntitySet to_generate;
  std::set<std::string> stale;
  for (const auto& key : touched) {
    const auto* rec = index.entities.find(key);
    if (!rec) continue;
    auto df = rec->doc_ids.size();
    bool was_bridge = index.bridging.count(key) > 0;
    if (df > tau) {
      if (was_bridge) {
        stale.insert(key);
        index.bridging.erase(key);
        report.dropped.push_back(key);
      }
    } else if (df >= 2) {
      if (was_bridge) stale.insert(key);
      (was_bridge ? report.rebridged : report.newly_bridged).push_back(key);
      to_generate.push_back({key, rec->display, {rec->doc_ids.begin(), rec->doc_ids.end()}});
    }
  }

  report.entries_removed = index.store.remove_if([&](const IndexEntry& e) {
    return e.kind == EntryKind::kBridging && e.entity && stale.count(*e.entity) > 0;
  });

  auto generated = run_stage2(to_generate, index, gateway, options);
  std::vector<IndexEntry> fresh;
  for (std::size_t i = 0; i < to_generate.size(); ++i) {
    for (auto& e : bridging_entries(generated[i])) fresh.push_back(std::move(e));
    index.bridging[to_generate[i].key] = std::move(generated[i]);
  }
  embed_into(fresh, gateway);
  report.entries_added += fresh.size();
  index.store.upsert(std::move(fresh));
  return report;
}

}  // namespace indexrag
