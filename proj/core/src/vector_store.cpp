#include "indexrag/vector_store.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "indexrag/errors.hpp"

namespace indexrag {

using nlohmann::json;

namespace {

constexpr std::string_view kFormatName = "indexrag-store";

}  // namespace

Embedding normalized(std::span<const double> v) {
  double sq = 0.0;
  for (double x : v) sq += x * x;
  double norm = std::sqrt(sq);
  if (!(norm > 0.0) || !std::isfinite(norm)) throw StoreError("vector has zero or non-finite norm");
  Embedding out(v.begin(), v.end());
  for (double& x : out) x /= norm;
  return out;
}

std::size_t VectorStore::upsert(std::vector<IndexEntry> entries) {
  // Validate the whole batch first so a bad entry leaves the store untouched.
  std::size_t dim = dimension_;
  for (auto& e : entries) {
    e.validate();
    if (e.embedding.empty()) throw StoreError("entry '" + e.entry_id + "' has an empty embedding");
    if (dim == 0) dim = e.embedding.size();
    if (e.embedding.size() != dim) {
      throw StoreError("entry '" + e.entry_id + "' has dimension " + std::to_string(e.embedding.size()) +
                       ", store expects " + std::to_string(dim));
    }
    e.embedding = normalized(e.embedding);
  }
  dimension_ = dim;
  for (auto& e : entries) {
    auto it = slot_.find(e.entry_id);
    if (it != slot_.end()) {
      entries_[it->second] = std::move(e);
    } else {
      slot_.emplace(e.entry_id, entries_.size());
      entries_.push_back(std::move(e));
    }
  }
  return entries.size();
}

std::size_t VectorStore::remove_if(const std::function<bool(const IndexEntry&)>& pred) {
  auto first = std::stable_partition(entries_.begin(), entries_.end(), [&](const IndexEntry& e) { return !pred(e); });
  auto removed = static_cast<std::size_t>(std::distance(first, entries_.end()));
  entries_.erase(first, entries_.end());
  rebuild_slots();
  return removed;
}

void VectorStore::rebuild_slots() {
  slot_.clear();
  for (std::size_t i = 0; i < entries_.size(); ++i) slot_.emplace(entries_[i].entry_id, i);
}

std::vector<SearchHit> VectorStore::search(std::span<const double> query, std::size_t n) const {
  if (n == 0) throw StoreError("search needs n >= 1");
  if (entries_.empty()) return {};
  if (query.size() != dimension_) {
    throw StoreError("query has dimension " + std::to_string(query.size()) + ", store has " +
                     std::to_string(dimension_));
  }
  Embedding q = normalized(query);
  std::vector<double> scores(entries_.size());
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const auto& v = entries_[i].embedding;
    scores[i] = std::inner_product(v.begin(), v.end(), q.begin(), 0.0);
  }
  std::vector<std::size_t> order(entries_.size());
  std::iota(order.begin(), order.end(), 0);
  auto better = [&](std::size_t a, std::size_t b) { return scores[a] > scores[b] || (scores[a] == scores[b] && a < b); };
  std::size_t take = std::min(n, order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take), order.end(), better);
  std::vector<SearchHit> hits;
  hits.reserve(take);
  for (std::size_t i = 0; i < take; ++i) {
    double s = std::clamp(scores[order[i]], -1.0, 1.0);
    hits.push_back({entries_[order[i]], s});
  }
  return hits;
}

const IndexEntry* VectorStore::find(std::string_view entry_id) const {
  auto it = slot_.find(std::string(entry_id));
  return it == slot_.end() ? nullptr : &entries_[it->second];
}

std::size_t VectorStore::count(EntryKind kind) const {
  return static_cast<std::size_t>(
      std::count_if(entries_.begin(), entries_.end(), [kind](const IndexEntry& e) { return e.kind == kind; }));
}

void VectorStore::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw PersistenceError("cannot write store file " + path.string());
  out << json{{"format", kFormatName}, {"version", kFormatVersion}, {"dimension", dimension_}, {"count", entries_.size()}}
             .dump()
      << '\n';
  for (const auto& e : entries_) {
    json rec = {{"entry_id", e.entry_id},
                {"kind", to_string(e.kind)},
                {"text", e.text},
                {"provenance", e.provenance},
                {"embedding", e.embedding}};
    if (e.entity) rec["entity"] = *e.entity;
    out << rec.dump() << '\n';
  }
  if (!out) throw PersistenceError("failed writing store file " + path.string());
}

VectorStore VectorStore::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw PersistenceError("cannot open store file " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw PersistenceError("store file " + path.string() + " is empty");
  json header = json::parse(line, nullptr, false);
  if (header.is_discarded() || !header.is_object() || header.value("format", "") != kFormatName) {
    throw PersistenceError("store file " + path.string() + " has no valid header");
  }
  if (header.value("version", -1) != kFormatVersion) {
    throw PersistenceError("unsupported store format version " + header.value("version", json(nullptr)).dump());
  }
  auto dimension = header.value("dimension", std::size_t{0});
  auto expected = header.value("count", std::size_t{0});

  VectorStore store;
  store.dimension_ = dimension;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto where = path.string() + ":" + std::to_string(line_no);
    json rec = json::parse(line, nullptr, false);
    try {
      if (rec.is_discarded() || !rec.is_object()) throw PersistenceError("not a JSON object");
      IndexEntry e;
      e.entry_id = rec.at("entry_id").get<std::string>();
      e.kind = entry_kind_from_string(rec.at("kind").get<std::string>());
      e.text = rec.at("text").get<std::string>();
      e.provenance = rec.at("provenance").get<std::set<std::string>>();
      e.embedding = rec.at("embedding").get<Embedding>();
      if (rec.contains("entity")) e.entity = rec["entity"].get<std::string>();
      e.validate();
      if (e.embedding.size() != dimension) throw PersistenceError("embedding length differs from header dimension");
      if (store.slot_.count(e.entry_id)) throw PersistenceError("duplicate entry_id " + e.entry_id);
      store.slot_.emplace(e.entry_id, store.entries_.size());
      store.entries_.push_back(std::move(e));
    } catch (const PersistenceError& err) {
      throw PersistenceError(where + ": " + err.what());
    } catch (const std::exception& err) {
      throw PersistenceError(where + ": malformed record: " + err.what());
    }
  }
  if (store.entries_.size() != expected) {
    throw PersistenceError("store file " + path.string() + " declares " + std::to_string(expected) + " entries, found " +
                           std::to_string(store.entries_.size()));
  }
  if (store.entries_.empty()) store.dimension_ = 0;
  return store;
}

}  // namespace indexrag
