#include "indexrag/prompts.hpp"

#include <cctype>
#include <optional>

#include "indexrag/errors.hpp"

namespace indexrag {
namespace {

constexpr std::string_view kStage1Qa =
    "You are an expert information extractor specializing in converting unstructured documents into "
    "clear, atomic question-answer pairs.\n"
    "\n"
    "Extract ALL factual information from the following document as question-answer pairs. Each pair "
    "must answer exactly one question, be self-contained, and be verifiable from the source content. "
    "Extract questions for facts, descriptions, properties, relationships, and events. For each entity "
    "mentioned, also extract questions about its relationships to other entities.\n"
    "\n"
    "Document:\n"
    "{text}\n"
    "\n"
    "Return only a valid JSON object without any other text.\n"
    "Use the form {\"qa_pairs\": [{\"question\": \"...\", \"answer\": \"...\"}], \"entities\": [\"...\"]} "
    "where \"entities\" lists every named entity mentioned in the document.";

constexpr std::string_view kStage1Summary =
    "Given the following document, write a comprehensive summary that captures all key facts, "
    "entities, relationships, and details. Be thorough and do not omit important information.\n"
    "\n"
    "Document:\n"
    "{text}\n"
    "\n"
    "Summary:";

constexpr std::string_view kStage2Bridge =
    "Given the following information about \"{entity}\" from multiple source documents, generate "
    "bridging facts that connect information across these documents.\n"
    "\n"
    "{doc_sections}\n"
    "\n"
    "Requirements:\n"
    "- Each bridging fact must combine information from 2+ documents\n"
    "- Be factually accurate — only connect information that is logically related\n"
    "- Each fact should be self-contained and understandable without context\n"
    "- Do not generate speculative connections\n"
    "- If documents share the entity name but are about unrelated topics, return empty\n"
    "\n"
    "Return a JSON array of strings. If no meaningful connections exist, return [].";

constexpr std::string_view kAnswerGen =
    "You are a precise question answering assistant. Answer with ONLY the exact information "
    "requested, with no explanations or extra words. If the answer is a name, give only the name. "
    "If the answer is a number, give only the number. If the answer is yes/no, give only yes or no.\n"
    "\n"
    "Context:\n"
    "{context}\n"
    "\n"
    "Question:\n"
    "{question}";

constexpr std::string_view kIrcotStep =
    "You are a reasoning assistant that helps answer multi-hop questions step by step.\n"
    "\n"
    "Question: {question}\n"
    "\n"
    "Retrieved Information:\n"
    "{context}\n"
    "\n"
    "Reasoning so far:\n"
    "{cot_so_far}\n"
    "\n"
    "Write ONE brief reasoning sentence that makes progress toward answering the question. If more "
    "information is needed, suggest a specific search query.\n"
    "\n"
    "Format your response as:\n"
    "Reasoning: <one sentence of reasoning>\n"
    "Search: <next search query, or DONE if ready to answer>";

const PromptTemplate kTemplates[] = {
    {TemplateId::kStage1Qa, kStage1Qa},         {TemplateId::kStage1Summary, kStage1Summary},
    {TemplateId::kStage2Bridge, kStage2Bridge}, {TemplateId::kAnswerGen, kAnswerGen},
    {TemplateId::kIrcotStep, kIrcotStep},
};

bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

// Length of the placeholder starting at body[pos] (which is '{'), or nullopt.
std::optional<std::size_t> placeholder_at(std::string_view body, std::size_t pos) {
  std::size_t i = pos + 1;
  if (i >= body.size() || !is_ident_start(body[i])) return std::nullopt;
  while (i < body.size() && is_ident_char(body[i])) ++i;
  if (i >= body.size() || body[i] != '}') return std::nullopt;
  return i - pos + 1;
}

}  // namespace

std::string_view to_string(TemplateId id) {
  switch (id) {
    case TemplateId::kStage1Qa: return "stage1_qa";
    case TemplateId::kStage1Summary: return "stage1_summary";
    case TemplateId::kStage2Bridge: return "stage2_bridge";
    case TemplateId::kAnswerGen: return "answer_gen";
    case TemplateId::kIrcotStep: return "ircot_step";
  }
  return "unknown";
}

std::vector<std::string> PromptTemplate::placeholders() const {
  std::vector<std::string> names;
  for (std::size_t pos = body.find('{'); pos != std::string_view::npos; pos = body.find('{', pos + 1)) {
    if (auto len = placeholder_at(body, pos)) names.emplace_back(body.substr(pos + 1, *len - 2));
  }
  return names;
}

const PromptTemplate& prompt_template(TemplateId id) {
  for (const auto& t : kTemplates) {
    if (t.id == id) return t;
  }
  throw TemplateError("", "unknown template id");
}

std::string render_template(std::string_view body, const PromptBindings& bindings) {
  std::string out;
  out.reserve(body.size());
  std::size_t pos = 0;
  while (pos < body.size()) {
    std::size_t brace = body.find('{', pos);
    if (brace == std::string_view::npos) {
      out.append(body.substr(pos));
      break;
    }
    out.append(body.substr(pos, brace - pos));
    auto len = placeholder_at(body, brace);
    if (!len) {
      out.push_back('{');
      pos = brace + 1;
      continue;
    }
    std::string_view name = body.substr(brace + 1, *len - 2);
    auto it = bindings.find(name);
    if (it == bindings.end()) {
      throw TemplateError(std::string(name), "no binding for placeholder '" + std::string(name) + "'");
    }
    out.append(it->second);
    pos = brace + *len;
  }
  return out;
}

std::string render_prompt(TemplateId id, const PromptBindings& bindings) {
  return render_template(prompt_template(id).body, bindings);
}

}  // namespace indexrag
