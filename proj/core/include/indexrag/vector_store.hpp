#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "indexrag/knowledge.hpp"

namespace indexrag {

struct SearchHit {
  IndexEntry entry;
  double score = 0.0;  // cosine similarity in [-1, 1]
};

/// Exact flat store over L2-normalized embeddings. Entries keep their insertion slot, which
/// breaks score ties. Const member functions may run concurrently; mutation needs exclusive
/// access.
class VectorStore {
 public:
  static constexpr int kFormatVersion = 1;

  /// Inserts or replaces by entry_id (a replaced entry keeps its slot). The first insert fixes
  /// the dimension. Throws StoreError on dimension mismatch or zero-norm embeddings.
  std::size_t upsert(std::vector<IndexEntry> entries);

  /// Returns how many entries were removed.
  std::size_t remove_if(const std::function<bool(const IndexEntry&)>& pred);

  /// Exact top-n by cosine, non-increasing score, ties in insertion order. An empty store
  /// yields no hits. Throws StoreError for a zero or wrongly sized query or n == 0.
  std::vector<SearchHit> search(std::span<const double> query, std::size_t n) const;

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  std::size_t dimension() const { return dimension_; }
  const std::vector<IndexEntry>& entries() const { return entries_; }
  const IndexEntry* find(std::string_view entry_id) const;
  std::size_t count(EntryKind kind) const;

  /// Header line {"format","version","dimension","count"} then one JSON record per entry.
  void save(const std::filesystem::path& path) const;
  static VectorStore load(const std::filesystem::path& path);

 private:
  void rebuild_slots();

  std::size_t dimension_ = 0;
  std::vector<IndexEntry> entries_;
  std::unordered_map<std::string, std::size_t> slot_;
};

/// L2 normalization. Throws StoreError on a zero or non-finite vector.
Embedding normalized(std::span<const double> v);

}  // namespace indexrag
