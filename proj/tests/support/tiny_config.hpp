#pragma once

#include <fstream>
#include <regex>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "betazero/cli/commands.hpp"

namespace betazero::oracle {

inline std::string readPreset(const std::string& env) {
  std::ifstream in(cli::presetPath(env, "desk"));
  if (!in) throw std::runtime_error("missing preset for " + env);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

/// Replaces `key = ...` inside `[section]` of a preset file.
inline std::string overrideKey(std::string text, const std::string& section, const std::string& key,
                        const std::string& value) {
  const auto start = text.find("[" + section + "]");
  if (start == std::string::npos) throw std::invalid_argument("no section " + section);
  const auto end = text.find("\n[", start + 1);
  const auto block = text.substr(start, end == std::string::npos ? end : end - start);
  const std::regex line("(^|\\n)" + key + " = [^\\n]*");
  if (!std::regex_search(block, line))
    throw std::invalid_argument("no key " + section + "." + key);
  const auto replaced = std::regex_replace(block, line, "$1" + key + " = " + value,
                                           std::regex_constants::format_first_only);
  return text.replace(start, block.size(), replaced);
}

/// Shrinks a preset to something that runs in seconds.
inline std::string tinyConfig(const std::string& env) {
  auto t = readPreset(env);
  const std::vector<std::tuple<std::string, std::string, std::string>> edits{
      {"problem", "particles", "50"},        {"iteration", "iterations", "1"},
      {"iteration", "data_episodes", "2"},   {"iteration", "holdout_episodes", "2"},
      {"train", "epochs", "1"},              {"train", "sample_count", "64"},
      {"train", "batch_size", "32"},         {"offline", "iterations", "3"},
      {"offline", "depth", "3"},             {"online", "iterations", "3"},
      {"online", "depth", "3"},              {"eval", "seeds", "2"},
      {"sweep", "points", "11"},             {"sweep", "seeds", "1"},
      {"ablate", "grid_points", "11"},       {"ablate", "grid_seeds", "1"},
      {"baseline", "rollout_depth", "3"}};
  for (const auto& [section, key, value] : edits) t = overrideKey(t, section, key, value);
  if (env.rfind("lightdark", 0) == 0) {
    t = overrideKey(t, "problem", "max_steps", "10");
    t = overrideKey(t, "lavi", "samples_per_belief", "2");
    t = overrideKey(t, "lavi", "sweeps", "1");
    t = overrideKey(t, "lavi", "reconstruction_particles", "10");
    t = overrideKey(t, "lavi", "eval_samples", "2");
  } else {
    t = overrideKey(t, "problem", "max_steps", "5");
  }
  return t;
}

}  // namespace betazero::oracle
