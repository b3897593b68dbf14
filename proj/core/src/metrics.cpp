#include "indexrag/metrics.hpp"

#include <cctype>
#include <map>
#include <sstream>
#include <vector>

#include "indexrag/errors.hpp"

namespace indexrag {
namespace {

std::vector<std::string> tokens(const std::string& normalized) {
  std::vector<std::string> out;
  std::istringstream in(normalized);
  for (std::string t; in >> t;) out.push_back(std::move(t));
  return out;
}

}  // namespace

std::string normalize_answer(std::string_view s) {
  std::string lowered;
  lowered.reserve(s.size());
  for (char c : s) {
    auto uc = static_cast<unsigned char>(c);
    if (uc < 0x80 && std::ispunct(uc)) continue;
    lowered.push_back(uc < 0x80 ? static_cast<char>(std::tolower(uc)) : c);
  }
  std::string out;
  for (const auto& t : tokens(lowered)) {
    if (t == "a" || t == "an" || t == "the") continue;
    if (!out.empty()) out.push_back(' ');
    out += t;
  }
  return out;
}

int exact_match(std::string_view prediction, std::string_view gold) {
  return normalize_answer(prediction) == normalize_answer(gold) ? 1 : 0;
}

int answer_accuracy(std::string_view prediction, std::string_view gold) {
  return normalize_answer(prediction).find(normalize_answer(gold)) != std::string::npos ? 1 : 0;
}

F1Parts f1_parts(std::string_view prediction, std::string_view gold) {
  auto pred = tokens(normalize_answer(prediction));
  auto ref = tokens(normalize_answer(gold));
  if (pred.empty() || ref.empty()) {
    // Both empty is an exact match; keep F1 consistent with EM there.
    double same = pred.empty() && ref.empty() ? 1.0 : 0.0;
    return {same, same, same};
  }
  std::map<std::string, int> counts;
  for (const auto& t : ref) ++counts[t];
  int overlap = 0;
  for (const auto& t : pred) {
    auto it = counts.find(t);
    if (it != counts.end() && it->second > 0) {
      --it->second;
      ++overlap;
    }
  }
  if (overlap == 0) return {};
  double p = static_cast<double>(overlap) / static_cast<double>(pred.size());
  double r = static_cast<double>(overlap) / static_cast<double>(ref.size());
  return {p, r, 2.0 * p * r / (p + r)};
}

double f1_score(std::string_view prediction, std::string_view gold) { return f1_parts(prediction, gold).f1; }

double recall_at_k(std::span<const SearchHit> context, const std::set<std::string>& gold_passage_ids, std::size_t k) {
  if (k < 1) throw InputError("recall_at_k needs k >= 1");
  if (gold_passage_ids.empty()) return 0.0;
  std::set<std::string> found;
  for (std::size_t i = 0; i < context.size() && i < k; ++i) {
    const auto& e = context[i].entry;
    if (e.kind != EntryKind::kAku) continue;
    for (const auto& id : e.provenance) {
      if (gold_passage_ids.count(id)) found.insert(id);
    }
  }
  return static_cast<double>(found.size()) / static_cast<double>(gold_passage_ids.size());
}

}  // namespace indexrag
