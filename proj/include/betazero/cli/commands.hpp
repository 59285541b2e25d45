#pragma once

#include <cstdint>
#include <string>

namespace betazero::cli {

enum ExitCode { kOk = 0, kConfigError = 1, kDivergence = 2, kDataStarvation = 3 };

struct Options {
  std::string command;
  std::string env;
  std::string configPath;  // empty: use the preset file
  std::string preset = "desk";
  std::string outDir = "out";
  std::string checkpoint;
  std::string method;
  std::uint64_t seed = 1;
  int workers = 1;
  int nSeeds = -1;  // -1: take the count from the config
};

/// Directory holding the committed preset configs.
std::string presetDirectory();
std::string presetPath(const std::string& env, const std::string& preset);

/// Runs one command and returns the process exit code. Errors are reported
/// on stderr.
int runCommand(const Options& options);

}  // namespace betazero::cli
