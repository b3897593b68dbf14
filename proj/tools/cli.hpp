#pragma once

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "indexrag/gateway.hpp"
#include "indexrag/indexer.hpp"
#include "indexrag/query_engine.hpp"

namespace indexrag::cli {

/// Merged view of the index, query and gateway settings plus file locations.
/// Precedence: command-line flag > config file > built-in default. Credentials are read from
/// the environment only.
struct RunConfig {
  IndexConfig index;
  QueryConfig query;
  IndexerOptions indexer;
  int parallelism = 4;

  std::string corpus;
  std::string index_dir;
  std::string dataset;
  std::string out_dir = "eval_out";
  std::string mock_script;
  std::string endpoint;
  std::string chat_model = "gpt-4o-mini";
  std::string embedding_model = "text-embedding-3-small";
  std::vector<int> kb_sweep;
  bool exclude_failures = false;
};

/// Applies the keys present in a JSON config file over `cfg`. Throws InputError on unknown
/// keys or wrong value types.
void apply_config_file(RunConfig& cfg, const std::string& path);

/// Mock gateway when a script is configured, otherwise the OpenAI-compatible client.
/// Throws InputError when neither is usable.
std::unique_ptr<ModelGateway> make_gateway(const RunConfig& cfg);

/// Entry point shared by the executable and the tests. Returns the process exit status.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace indexrag::cli
