#pragma once

#include <string>
#include <vector>

#include "betazero/cli/config.hpp"
#include "betazero/envs/light_dark.hpp"
#include "betazero/envs/rock_sample.hpp"
#include "betazero/lavi/lavi.hpp"
#include "betazero/selfplay/selfplay.hpp"

namespace betazero::cli {

enum class EnvKind { LightDark5, LightDark10, RockSample15, RockSample20 };

EnvKind parseEnv(const std::string& name);
std::string envName(EnvKind env);
bool isLightDark(EnvKind env);

struct EvalSettings {
  int seeds = 100;
  EvalMode mode = EvalMode::Search;
};

struct LaviSettings {
  LaviConfig solver;
  int evalSamples = 100;
};

struct BaselineSettings {
  double c = 1.0;
  int rolloutDepth = 10;
};

struct SweepSettings {
  int points = 11;
  double kStateMax = 10.0;
  double kActionMax = 10.0;
  double alphaMax = 1.0;
  int seeds = 20;
};

struct AblateSettings {
  std::vector<std::string> arms;
  int gridPoints = 11;
  int gridSeeds = 20;
};

/// Everything a command needs, read from one config file.
struct Settings {
  EnvKind env = EnvKind::LightDark10;
  LightDarkParams lightDark;
  RockSampleParams rockSample;
  std::vector<int> trunkWidths;
  std::vector<int> headWidths;
  bool batchNorm = false;
  double dropout = 0.0;
  double batchNormMomentum = 0.7;
  IterationConfig iteration;
  SearchConfig online;
  EvalSettings eval;
  LaviSettings lavi;
  BaselineSettings baseline;
  SweepSettings sweep;
  AblateSettings ablate;
};

/// Reads and validates every key of the schema for `env`. Missing keys,
/// unknown keys and malformed values throw ConfigError.
Settings readSettings(const Config& config, EnvKind env);

NetworkSpec networkSpec(const Settings& s, int inputDim, int numActions);

}  // namespace betazero::cli
