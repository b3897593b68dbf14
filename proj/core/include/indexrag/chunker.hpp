#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

#include "indexrag/knowledge.hpp"

namespace indexrag {

/// Byte offsets of one chunk. [begin, end) is the chunk's own run of words (with the
/// whitespace that follows them); [overlap_begin, begin) is the tail repeated from the
/// previous chunk.
struct ChunkSpan {
  std::size_t overlap_begin = 0;
  std::size_t begin = 0;
  std::size_t end = 0;
};

/// Greedy split into runs of target_words whitespace-separated words. The own runs partition
/// the text. Every chunk after the first is prefixed with the last overlap_chars bytes before
/// it, moved left to the start of the word they cut into.
/// Throws InputError for text without words, target_words < 1 or overlap_chars < 0.
std::vector<ChunkSpan> chunk_spans(std::string_view text, int target_words, int overlap_chars);

/// One AKU per chunk, each with a single fact equal to the chunk text and no entities.
std::vector<AtomicKnowledgeUnit> chunk_document(const Document& doc, int target_words, int overlap_chars);

}  // namespace indexrag
