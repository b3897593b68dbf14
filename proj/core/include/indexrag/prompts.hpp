#pragma once

#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace indexrag {

enum class TemplateId { kStage1Qa, kStage1Summary, kStage2Bridge, kAnswerGen, kIrcotStep };

std::string_view to_string(TemplateId id);

/// Placeholders are written `{name}` where name is an identifier; any other brace is literal.
struct PromptTemplate {
  TemplateId id;
  std::string_view body;

  std::vector<std::string> placeholders() const;
};

using PromptBindings = std::map<std::string, std::string, std::less<>>;

const PromptTemplate& prompt_template(TemplateId id);

/// Substitutes every placeholder verbatim in one pass; bound values are never re-expanded.
/// Throws TemplateError naming the first placeholder that has no binding.
std::string render_template(std::string_view body, const PromptBindings& bindings);
std::string render_prompt(TemplateId id, const PromptBindings& bindings);

}  // namespace indexrag
