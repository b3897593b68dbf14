#include <gtest/gtest.h>

#include "indexrag/errors.hpp"
#include "indexrag/metrics.hpp"
#include "metric_cases.hpp"

using namespace indexrag;

TEST(NormalizeAnswer, Examples) {
  EXPECT_EQ(normalize_answer("The  Weston-super-Mare!"), "westonsupermare");
  EXPECT_EQ(normalize_answer("A theatre, an anthem"), "theatre anthem");
  EXPECT_EQ(normalize_answer(""), "");
}

TEST(Metrics, HandComputedCases) {
  for (const auto& c : indexrag::testing::metric_cases()) {
    SCOPED_TRACE(c.prediction + " | " + c.gold);
    EXPECT_EQ(exact_match(c.prediction, c.gold), c.em);
    EXPECT_EQ(answer_accuracy(c.prediction, c.gold), c.acc);
    EXPECT_NEAR(f1_score(c.prediction, c.gold), c.f1, 1e-9);
  }
}

TEST(Metrics, F1PartsWorkedExample) {
  auto p = f1_parts("president barack obama", "barack obama");
  EXPECT_NEAR(p.precision, 2.0 / 3.0, 1e-12);
  EXPECT_NEAR(p.recall, 1.0, 1e-12);
  EXPECT_NEAR(p.f1, 0.8, 1e-12);
}

TEST(Metrics, ExactMatchImpliesAccuracyAndFullF1) {
  for (const auto& c : indexrag::testing::metric_cases()) {
    if (exact_match(c.prediction, c.gold)) {
      EXPECT_EQ(answer_accuracy(c.prediction, c.gold), 1);
      EXPECT_EQ(f1_score(c.prediction, c.gold), 1.0);
    }
  }
}

namespace {

SearchHit hit(const std::string& id, EntryKind kind, std::set<std::string> prov) {
  IndexEntry e{id, kind, "t", {1.0}, std::move(prov), std::nullopt};
  if (kind == EntryKind::kBridging) e.entity = "x";
  return {e, 1.0};
}

}  // namespace

TEST(RecallAtK, CountsOnlyAkuEntries) {
  std::vector<SearchHit> ctx = {hit("bridge:x:0", EntryKind::kBridging, {"a", "b"}),
                                hit("aku:a", EntryKind::kAku, {"a"}), hit("aku:c", EntryKind::kAku, {"c"}),
                                hit("aku:b", EntryKind::kAku, {"b"})};
  EXPECT_DOUBLE_EQ(recall_at_k(ctx, {"a", "b"}, 4), 1.0);
  EXPECT_DOUBLE_EQ(recall_at_k(ctx, {"a", "b"}, 3), 0.5);
  EXPECT_DOUBLE_EQ(recall_at_k(ctx, {"a", "b"}, 1), 0.0);
  EXPECT_DOUBLE_EQ(recall_at_k(ctx, {}, 4), 0.0);
  EXPECT_THROW(recall_at_k(ctx, {"a"}, 0), InputError);
}
