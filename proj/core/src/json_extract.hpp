#pragma once

#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

namespace indexrag::detail {

/// Strips markdown code fences and any prose before the first '{' / '[' or after the last
/// matching closer.
std::string repair_json_text(std::string_view raw);

/// Parses raw model output as JSON; on failure parses repair_json_text(raw) once.
std::optional<nlohmann::json> parse_model_json(std::string_view raw);

}  // namespace indexrag::detail
