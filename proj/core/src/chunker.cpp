#include "indexrag/chunker.hpp"

#include <cctype>
#include <string>

#include "indexrag/errors.hpp"

namespace indexrag {
namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

}  // namespace

std::vector<ChunkSpan> chunk_spans(std::string_view text, int target_words, int overlap_chars) {
  if (target_words < 1) throw InputError("chunk target_words must be at least 1");
  if (overlap_chars < 0) throw InputError("chunk overlap_chars must be non-negative");

  std::vector<std::size_t> word_starts;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (!is_space(text[i]) && (i == 0 || is_space(text[i - 1]))) word_starts.push_back(i);
  }
  if (word_starts.empty()) throw InputError("cannot chunk text without words");

  const auto per_chunk = static_cast<std::size_t>(target_words);
  std::vector<ChunkSpan> spans;
  for (std::size_t w = 0; w < word_starts.size(); w += per_chunk) {
    ChunkSpan s;
    s.begin = spans.empty() ? 0 : word_starts[w];
    std::size_t next = w + per_chunk;
    s.end = next < word_starts.size() ? word_starts[next] : text.size();
    s.overlap_begin = s.begin;
    if (!spans.empty() && overlap_chars > 0) {
      auto back = std::min<std::size_t>(static_cast<std::size_t>(overlap_chars), s.begin);
      std::size_t p = s.begin - back;
      while (p > 0 && !is_space(text[p - 1])) --p;
      s.overlap_begin = p;
    }
    spans.push_back(s);
  }
  return spans;
}

std::vector<AtomicKnowledgeUnit> chunk_document(const Document& doc, int target_words, int overlap_chars) {
  if (doc.text.empty()) throw InputError("document '" + doc.doc_id + "' has empty text");
  std::vector<AtomicKnowledgeUnit> units;
  for (const auto& s : chunk_spans(doc.text, target_words, overlap_chars)) {
    units.push_back(
        AtomicKnowledgeUnit::make(doc.doc_id, {doc.text.substr(s.overlap_begin, s.end - s.overlap_begin)}));
  }
  return units;
}

}  // namespace indexrag
