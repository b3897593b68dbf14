#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "cli.hpp"

int main(int argc, char** argv) {
  spdlog::set_default_logger(spdlog::stderr_color_mt("indexrag"));
  if (const char* level = std::getenv("INDEXRAG_LOG_LEVEL")) spdlog::set_level(spdlog::level::from_str(level));
  std::vector<std::string> args(argv + 1, argv + argc);
  return indexrag::cli::run(args, std::cout, std::cerr);
}
