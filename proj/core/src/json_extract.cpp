#include "json_extract.hpp"

namespace indexrag::detail {

std::string repair_json_text(std::string_view raw) {
  std::string text(raw);
  // Drop fence lines such as ```json and ```.
  std::string unfenced;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    std::string_view line(text.data() + pos, (nl == std::string::npos ? text.size() : nl) - pos);
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string_view::npos || line.substr(first, 3) != "```") {
      unfenced.append(line);
      unfenced.push_back('\n');
    }
    if (nl == std::string::npos) break;
    pos = nl + 1;
  }
  auto open = unfenced.find_first_of("{[");
  if (open == std::string::npos) return unfenced;
  char closer = unfenced[open] == '{' ? '}' : ']';
  auto close = unfenced.rfind(closer);
  if (close == std::string::npos || close < open) return unfenced.substr(open);
  return unfenced.substr(open, close - open + 1);
}

std::optional<nlohmann::json> parse_model_json(std::string_view raw) {
  auto j = nlohmann::json::parse(raw, nullptr, false);
  if (!j.is_discarded()) return j;
  j = nlohmann::json::parse(repair_json_text(raw), nullptr, false);
  if (!j.is_discarded()) return j;
  return std::nullopt;
}

}  // namespace indexrag::detail
