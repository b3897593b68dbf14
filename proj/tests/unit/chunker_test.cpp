#include <gtest/gtest.h>

#include <sstream>

#include "indexrag/chunker.hpp"
#include "indexrag/errors.hpp"

using namespace indexrag;

namespace {

std::string words(int n) {
  std::string out;
  for (int i = 0; i < n; ++i) out += (i ? " w" : "w") + std::to_string(i);
  return out;
}

int count_words(std::string_view s) {
  std::istringstream in{std::string(s)};
  std::string w;
  int n = 0;
  while (in >> w) ++n;
  return n;
}

}  // namespace

TEST(Chunker, ShortDocumentIsOneChunk) {
  auto text = words(50);
  auto spans = chunk_spans(text, 100, 80);
  ASSERT_EQ(spans.size(), 1u);
  EXPECT_EQ(spans[0].begin, 0u);
  EXPECT_EQ(spans[0].end, text.size());
}

TEST(Chunker, LongDocumentSplitsIntoHundredWordRuns) {
  auto text = words(250);
  auto spans = chunk_spans(text, 100, 80);
  ASSERT_EQ(spans.size(), 3u);
  EXPECT_EQ(count_words(std::string_view(text).substr(spans[0].begin, spans[0].end - spans[0].begin)), 100);
  EXPECT_EQ(count_words(std::string_view(text).substr(spans[1].begin, spans[1].end - spans[1].begin)), 100);
  EXPECT_EQ(count_words(std::string_view(text).substr(spans[2].begin, spans[2].end - spans[2].begin)), 50);
  for (std::size_t i = 1; i < spans.size(); ++i) {
    EXPECT_GE(spans[i].begin - spans[i].overlap_begin, 80u);
    // The overlap starts on a word boundary.
    EXPECT_TRUE(spans[i].overlap_begin == 0 || text[spans[i].overlap_begin - 1] == ' ');
  }
}

TEST(Chunker, OwnRunsPartitionTheText) {
  auto text = "  " + words(333) + "\n";
  auto spans = chunk_spans(text, 37, 25);
  std::string rebuilt;
  std::size_t expect_begin = 0;
  for (const auto& s : spans) {
    EXPECT_EQ(s.begin, expect_begin);
    rebuilt += text.substr(s.begin, s.end - s.begin);
    expect_begin = s.end;
  }
  EXPECT_EQ(rebuilt, text);
}

TEST(Chunker, ZeroOverlap) {
  auto spans = chunk_spans(words(30), 10, 0);
  ASSERT_EQ(spans.size(), 3u);
  for (const auto& s : spans) EXPECT_EQ(s.overlap_begin, s.begin);
}

TEST(Chunker, Errors) {
  EXPECT_THROW(chunk_spans("   ", 100, 80), InputError);
  EXPECT_THROW(chunk_spans("a b", 0, 80), InputError);
  EXPECT_THROW(chunk_spans("a b", 10, -1), InputError);
}

TEST(Chunker, ChunkDocumentMakesOneUnitPerChunk) {
  Document doc{"d", "T", words(250)};
  auto units = chunk_document(doc, 100, 80);
  ASSERT_EQ(units.size(), 3u);
  for (const auto& u : units) {
    EXPECT_EQ(u.doc_id, "d");
    ASSERT_EQ(u.facts.size(), 1u);
    EXPECT_EQ(u.merged_text, u.facts[0]);
    EXPECT_TRUE(u.entities.empty());
  }
  EXPECT_TRUE(units[1].merged_text.find("w100") != std::string::npos);
}
