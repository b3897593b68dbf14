#pragma once

#include <cstddef>
#include <set>
#include <span>
#include <string>
#include <string_view>

#include "indexrag/vector_store.hpp"

namespace indexrag {

/// SQuAD answer normalization: lowercase, delete ASCII punctuation, drop the articles
/// a/an/the as whole tokens, collapse whitespace.
std::string normalize_answer(std::string_view s);

int exact_match(std::string_view prediction, std::string_view gold);

/// 1 when the normalized gold answer is a substring of the normalized prediction.
int answer_accuracy(std::string_view prediction, std::string_view gold);

struct F1Parts {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// Token-level F1 over normalized whitespace tokens with bag (multiset) overlap.
F1Parts f1_parts(std::string_view prediction, std::string_view gold);
double f1_score(std::string_view prediction, std::string_view gold);

/// Fraction of gold passages that are the source of an AKU-kind entry among the first k
/// context entries. Bridging entries never count. 0 when there are no gold passages.
double recall_at_k(std::span<const SearchHit> context, const std::set<std::string>& gold_passage_ids, std::size_t k);

}  // namespace indexrag
