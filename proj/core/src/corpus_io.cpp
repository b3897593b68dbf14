#include "indexrag/corpus_io.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <string>

#include <json.hpp>

#include "indexrag/errors.hpp"

namespace indexrag {

using nlohmann::json;

std::vector<Document> parse_corpus(std::istream& in) {
  std::vector<Document> docs;
  std::set<std::string> ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto where = "corpus line " + std::to_string(line_no);
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw InputError(where + ": not a JSON object");
    if (!j.contains("doc_id") || !j["doc_id"].is_string()) throw InputError(where + ": missing string doc_id");
    if (!j.contains("text") || !j["text"].is_string()) throw InputError(where + ": missing string text");
    Document d;
    d.doc_id = j["doc_id"].get<std::string>();
    d.text = j["text"].get<std::string>();
    if (j.contains("title") && j["title"].is_string()) d.title = j["title"].get<std::string>();
    try {
      d.validate();
    } catch (const InputError& e) {
      throw InputError(where + ": " + e.what());
    }
    if (!ids.insert(d.doc_id).second) throw InputError(where + ": duplicate doc_id '" + d.doc_id + "'");
    docs.push_back(std::move(d));
  }
  return docs;
}

std::vector<Document> read_corpus(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw PersistenceError("cannot open corpus file " + path.string());
  return parse_corpus(in);
}

void write_corpus(std::ostream& out, const std::vector<Document>& docs) {
  for (const auto& d : docs) {
    out << json{{"doc_id", d.doc_id}, {"title", d.title}, {"text", d.text}}.dump() << '\n';
  }
}

}  // namespace indexrag
