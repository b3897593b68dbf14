#pragma once

#include <filesystem>
#include <iosfwd>
#include <vector>

#include "indexrag/knowledge.hpp"

namespace indexrag {

/// Parses line-delimited JSON records `{"doc_id", "title", "text"}`. Blank lines are
/// skipped. Throws InputError naming the line on malformed records or duplicate ids.
std::vector<Document> parse_corpus(std::istream& in);

/// Throws PersistenceError when the file cannot be opened.
std::vector<Document> read_corpus(const std::filesystem::path& path);

void write_corpus(std::ostream& out, const std::vector<Document>& docs);

}  // namespace indexrag
