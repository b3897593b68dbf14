#include <gtest/gtest.h>

#include <fstream>
#include <random>

#include "fixture.hpp"
#include "indexrag/errors.hpp"
#include "indexrag/vector_store.hpp"
#include "oracles.hpp"

using namespace indexrag;
using indexrag::testing::TempDir;

namespace {

IndexEntry aku(const std::string& id, Embedding v, const std::string& text = "t") {
  return {id, EntryKind::kAku, text, std::move(v), {id}, std::nullopt};
}

IndexEntry bridge(const std::string& id, Embedding v) {
  return {id, EntryKind::kBridging, "b", std::move(v), {"d1", "d2"}, std::string("e")};
}

std::vector<std::string> ids(const std::vector<SearchHit>& hits) {
  std::vector<std::string> out;
  for (const auto& h : hits) out.push_back(h.entry.entry_id);
  return out;
}

}  // namespace

TEST(VectorStore, UpsertReplacesInPlace) {
  VectorStore s;
  s.upsert({aku("a", {1, 0}), aku("b", {0, 1})});
  s.upsert({aku("a", {0, 2}, "new")});
  EXPECT_EQ(s.size(), 2u);
  EXPECT_EQ(s.entries()[0].entry_id, "a");
  EXPECT_EQ(s.find("a")->text, "new");
  EXPECT_EQ(s.find("a")->embedding, (Embedding{0, 1}));
  // a and b now tie; a keeps the earlier slot.
  EXPECT_EQ(ids(s.search(std::vector<double>{0, 1}, 2)), (std::vector<std::string>{"a", "b"}));
}

TEST(VectorStore, RejectsBadVectors) {
  VectorStore s;
  s.upsert({aku("a", {1, 0, 0})});
  EXPECT_THROW(s.upsert({aku("b", {1, 0})}), StoreError);
  EXPECT_THROW(s.upsert({aku("c", {0, 0, 0})}), StoreError);
  // Whole batch is validated before anything is inserted.
  EXPECT_THROW(s.upsert({aku("d", {1, 1, 1}), aku("e", {0, 0, 0})}), StoreError);
  EXPECT_EQ(s.size(), 1u);
  EXPECT_THROW(s.search(std::vector<double>{1, 0}, 1), StoreError);
  EXPECT_THROW(s.search(std::vector<double>{0, 0, 0}, 1), StoreError);
  EXPECT_THROW(s.search(std::vector<double>{1, 0, 0}, 0), StoreError);
}

TEST(VectorStore, EmptyStoreReturnsNothing) {
  VectorStore s;
  EXPECT_TRUE(s.search(std::vector<double>{1, 2}, 5).empty());
}

TEST(VectorStore, CountsAndRemoves) {
  VectorStore s;
  s.upsert({aku("a", {1, 0}), bridge("x", {1, 1}), aku("b", {0, 1})});
  EXPECT_EQ(s.count(EntryKind::kAku), 2u);
  EXPECT_EQ(s.count(EntryKind::kBridging), 1u);
  EXPECT_EQ(s.remove_if([](const IndexEntry& e) { return e.kind == EntryKind::kBridging; }), 1u);
  EXPECT_EQ(s.size(), 2u);
  EXPECT_EQ(s.find("x"), nullptr);
  EXPECT_NE(s.find("b"), nullptr);
}

TEST(VectorStore, MatchesBruteForceCosine) {
  std::mt19937 rng(3);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 20; ++trial) {
    VectorStore s;
    std::vector<std::vector<double>> raw;
    std::vector<IndexEntry> batch;
    int n = 1 + static_cast<int>(rng() % 60);
    for (int i = 0; i < n; ++i) {
      std::vector<double> v(8);
      if (i > 0 && rng() % 5 == 0) {
        v = raw[rng() % raw.size()];
      } else {
        for (auto& x : v) x = g(rng);
      }
      raw.push_back(v);
      batch.push_back(aku("e" + std::to_string(i), v));
    }
    s.upsert(batch);
    std::vector<double> q(8);
    for (auto& x : q) x = g(rng);
    auto want = oracle::cosine_ranking(raw, q, 10);
    auto hits = s.search(q, 10);
    ASSERT_EQ(hits.size(), want.size());
    for (std::size_t i = 0; i < want.size(); ++i) {
      EXPECT_EQ(hits[i].entry.entry_id, "e" + std::to_string(want[i]));
      EXPECT_NEAR(hits[i].score, oracle::cosine(raw[want[i]], q), 1e-12);
    }
  }
}

TEST(VectorStore, ScaleInvariant) {
  VectorStore s;
  s.upsert({aku("a", {3, 1, 2}), aku("b", {-1, 4, 0}), aku("c", {1, 1, 1})});
  std::vector<double> q = {0.3, 0.2, -0.5};
  std::vector<double> q_scaled = {30, 20, -50};
  auto x = s.search(q, 3);
  auto y = s.search(q_scaled, 3);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(x[i].entry.entry_id, y[i].entry.entry_id);
    EXPECT_NEAR(x[i].score, y[i].score, 1e-9);
  }
}

TEST(VectorStore, SaveLoadRoundTrip) {
  TempDir dir;
  VectorStore s;
  s.upsert({aku("a", {0.1, 0.7, -0.2}, "line\nbreak \"quoted\""), bridge("x", {1e-300, 2, 3}), aku("b", {1, 0, 0})});
  s.save(dir / "store.jsonl");
  auto back = VectorStore::load(dir / "store.jsonl");
  EXPECT_EQ(back.entries(), s.entries());
  EXPECT_EQ(back.dimension(), 3u);
  std::vector<double> q = {0.2, -1, 0.4};
  auto a = s.search(q, 3), b = back.search(q, 3);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(a[i].entry.entry_id, b[i].entry.entry_id);
    EXPECT_EQ(a[i].score, b[i].score);
  }
}

TEST(VectorStore, LoadErrors) {
  TempDir dir;
  EXPECT_THROW(VectorStore::load(dir / "missing.jsonl"), PersistenceError);

  auto write = [&](const std::string& name, const std::string& body) {
    std::ofstream(dir / name) << body;
    return dir / name;
  };
  EXPECT_THROW(VectorStore::load(write("garbage.jsonl", "hello\n")), PersistenceError);
  EXPECT_THROW(VectorStore::load(write("version.jsonl",
                                       R"({"format":"indexrag-store","version":99,"dimension":2,"count":0})"
                                       "\n")),
               PersistenceError);
  EXPECT_THROW(VectorStore::load(write("count.jsonl",
                                       R"({"format":"indexrag-store","version":1,"dimension":2,"count":3})"
                                       "\n")),
               PersistenceError);
}
