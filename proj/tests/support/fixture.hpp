#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <unistd.h>

#include "indexrag/corpus_io.hpp"
#include "indexrag/indexer.hpp"
#include "indexrag/mock_gateway.hpp"

namespace indexrag::testing {

inline std::filesystem::path fixture_dir() { return INDEXRAG_FIXTURE_DIR; }
inline std::filesystem::path aylwin_file(const std::string& name) { return fixture_dir() / "aylwin" / name; }

inline const char* kAylwinQuestion = "Where was the director of the film Aylwin born?";

inline MockScript aylwin_script() { return MockScript::load(aylwin_file("mock.json")); }
inline std::vector<Document> aylwin_corpus() { return read_corpus(aylwin_file("corpus.jsonl")); }
inline std::vector<Document> aylwin_added_docs() { return read_corpus(aylwin_file("add_doc.jsonl")); }

inline KnowledgeIndex build_aylwin_index(ModelGateway& gateway, IndexConfig config = {}) {
  return build_index(aylwin_corpus(), config, gateway);
}

inline std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Unique scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("indexrag_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace indexrag::testing
