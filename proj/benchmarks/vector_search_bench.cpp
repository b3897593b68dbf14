#include <random>

#include <benchmark/benchmark.h>

#include "indexrag/mock_gateway.hpp"
#include "indexrag/vector_store.hpp"

using namespace indexrag;

namespace {

VectorStore random_store(std::size_t n, std::size_t dim) {
  std::mt19937 rng(1);
  std::normal_distribution<double> g;
  std::vector<IndexEntry> batch;
  batch.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Embedding v(dim);
    for (auto& x : v) x = g(rng);
    batch.push_back({"e" + std::to_string(i), EntryKind::kAku, "t", std::move(v), {"d"}, std::nullopt});
  }
  VectorStore store;
  store.upsert(std::move(batch));
  return store;
}

void BM_Search(benchmark::State& state) {
  auto n = static_cast<std::size_t>(state.range(0));
  auto dim = static_cast<std::size_t>(state.range(1));
  auto store = random_store(n, dim);
  std::vector<double> q(dim, 0.5);
  for (auto _ : state) benchmark::DoNotOptimize(store.search(q, 20));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_Search)->Args({1000, 256})->Args({10000, 256})->Args({10000, 1536});

void BM_HashEmbedding(benchmark::State& state) {
  const std::string text = "Where was the director of the film Aylwin born? Henry Edwards directed Aylwin.";
  for (auto _ : state) benchmark::DoNotOptimize(hash_embedding(text, 256));
}
BENCHMARK(BM_HashEmbedding);

}  // namespace
