#include "betazero/cli/settings.hpp"

namespace betazero::cli {

EnvKind parseEnv(const std::string& name) {
  if (name == "lightdark5") return EnvKind::LightDark5;
  if (name == "lightdark10") return EnvKind::LightDark10;
  if (name == "rocksample-15-15") return EnvKind::RockSample15;
  if (name == "rocksample-20-20") return EnvKind::RockSample20;
  throw ConfigError("unknown environment '" + name + "'");
}

std::string envName(EnvKind env) {
  switch (env) {
    case EnvKind::LightDark5:
      return "lightdark5";
    case EnvKind::LightDark10:
      return "lightdark10";
    case EnvKind::RockSample15:
      return "rocksample-15-15";
    case EnvKind::RockSample20:
      return "rocksample-20-20";
  }
  return {};
}

bool isLightDark(EnvKind env) { return env == EnvKind::LightDark5 || env == EnvKind::LightDark10; }

namespace {

int positive(const Config& c, const std::string& key) {
  const long v = c.getInt(key);
  if (v < 1) throw ConfigError("config key '" + key + "' must be at least 1");
  return static_cast<int>(v);
}

int nonnegative(const Config& c, const std::string& key) {
  const long v = c.getInt(key);
  if (v < 0) throw ConfigError("config key '" + key + "' must be nonnegative");
  return static_cast<int>(v);
}

double unitInterval(const Config& c, const std::string& key) {
  const double v = c.getDouble(key);
  if (!(v >= 0.0 && v <= 1.0)) throw ConfigError("config key '" + key + "' must lie in [0, 1]");
  return v;
}

SearchConfig readSearch(const Config& c, const std::string& sec) {
  SearchConfig s;
  s.nOnline = nonnegative(c, sec + ".iterations");
  s.c = c.getDouble(sec + ".c");
  s.kAction = c.getDouble(sec + ".k_action");
  s.alphaAction = unitInterval(c, sec + ".alpha_action");
  s.kState = c.getDouble(sec + ".k_state");
  s.alphaState = unitInterval(c, sec + ".alpha_state");
  if (s.kAction < 0 || s.kState < 0)
    throw ConfigError("config section '" + sec + "': widening k must be nonnegative");
  s.actionWidening = c.getBool(sec + ".action_widening");
  s.stateWidening = c.getBool(sec + ".state_widening");
  s.depth = positive(c, sec + ".depth");
  s.temperature = c.getDouble(sec + ".temperature");
  s.zQ = unitInterval(c, sec + ".z_q");
  s.zN = unitInterval(c, sec + ".z_n");
  s.bootstrapQ0 = c.getBool(sec + ".bootstrap_q0");
  const auto crit = c.getString(sec + ".criterion");
  if (crit == "sample")
    s.finalCriterion = FinalCriterion::Sample;
  else if (crit == "argmax")
    s.finalCriterion = FinalCriterion::Argmax;
  else
    throw ConfigError("config key '" + sec + ".criterion' must be sample or argmax");
  s.renormalizePrior = c.getBool(sec + ".renormalize_prior");
  s.uniformWidening = c.getBool(sec + ".uniform_widening");
  return s;
}

}  // namespace

Settings readSettings(const Config& c, EnvKind env) {
  Settings s;
  s.env = env;

  EpisodeOptions episode;
  episode.nParticles = positive(c, "problem.particles");
  if (episode.nParticles < 2) throw ConfigError("config key 'problem.particles' must be >= 2");
  const int maxSteps = positive(c, "problem.max_steps");
  const double discount = c.getDouble("problem.discount");
  if (!(discount >= 0.0 && discount < 1.0))
    throw ConfigError("config key 'problem.discount' must lie in [0, 1)");
  if (isLightDark(env)) {
    auto& p = s.lightDark;
    p = env == EnvKind::LightDark5 ? LightDarkParams::lightDark5() : LightDarkParams::lightDark10();
    p.maxSteps = maxSteps;
    p.discount = discount;
    p.lightY = c.getDouble("problem.light_y");
    p.noiseSlope = c.getDouble("problem.noise_slope");
    p.noiseFloor = c.getDouble("problem.noise_floor");
    p.rewardCorrect = c.getDouble("problem.reward_correct");
    p.rewardWrong = c.getDouble("problem.reward_wrong");
    p.goalRadius = c.getDouble("problem.goal_radius");
    p.initialMean = c.getDouble("problem.initial_mean");
    p.initialStd = c.getDouble("problem.initial_std");
    p.initialLow.reset();
    p.initialHigh.reset();
    if (c.getBool("problem.truncate_initial")) {
      p.initialLow = c.getDouble("problem.initial_low");
      p.initialHigh = c.getDouble("problem.initial_high");
    } else {
      c.getString("problem.initial_low");
      c.getString("problem.initial_high");
    }
  } else {
    auto& p = s.rockSample;
    p.maxSteps = maxSteps;
    p.discount = discount;
    p.gridSize = positive(c, "problem.grid_size");
    p.rockCount = nonnegative(c, "problem.rock_count");
    p.sensorEfficiency = c.getDouble("problem.sensor_efficiency");
    p.goodSampleReward = c.getDouble("problem.good_sample_reward");
    p.badSampleReward = c.getDouble("problem.bad_sample_reward");
    p.exitReward = c.getDouble("problem.exit_reward");
    p.layoutSeed = static_cast<std::uint64_t>(c.getInt("problem.layout_seed"));
  }
  const auto repr = c.getString("network.representation");
  if (repr == "mean_std")
    episode.mode = RepresentationMode::MeanStd;
  else if (repr == "mean")
    episode.mode = RepresentationMode::MeanOnly;
  else
    throw ConfigError("config key 'network.representation' must be mean_std or mean");

  s.trunkWidths = c.getIntList("network.trunk_widths");
  s.headWidths = c.getIntList("network.head_widths");
  s.batchNorm = c.getBool("network.batch_norm");
  s.dropout = c.getDouble("network.dropout");
  if (!(s.dropout >= 0.0 && s.dropout < 1.0))
    throw ConfigError("config key 'network.dropout' must lie in [0, 1)");
  s.batchNormMomentum = unitInterval(c, "network.batch_norm_momentum");

  auto& it = s.iteration;
  it.episode = episode;
  it.nIterations = nonnegative(c, "iteration.iterations");
  it.nData = positive(c, "iteration.data_episodes");
  it.holdoutEpisodes = positive(c, "iteration.holdout_episodes");
  it.bufferCapacity = static_cast<std::size_t>(positive(c, "iteration.buffer_capacity"));
  it.bufferDepth = positive(c, "iteration.buffer_depth");

  auto& t = it.train;
  t.epochs = nonnegative(c, "train.epochs");
  t.learningRate = c.getDouble("train.learning_rate");
  t.l2 = c.getDouble("train.l2");
  t.batchSize = positive(c, "train.batch_size");
  const auto loss = c.getString("train.value_loss");
  if (loss == "mse")
    t.valueLoss = ValueLoss::MSE;
  else if (loss == "mae")
    t.valueLoss = ValueLoss::MAE;
  else
    throw ConfigError("config key 'train.value_loss' must be mse or mae");
  try {
    t.optimizer = parseOptimizer(c.getString("train.optimizer"));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config key 'train.optimizer': ") + e.what());
  }
  t.trainFraction = c.getDouble("train.train_fraction");
  if (!(t.trainFraction > 0.0 && t.trainFraction <= 1.0))
    throw ConfigError("config key 'train.train_fraction' must lie in (0, 1]");
  t.sampleCount = nonnegative(c, "train.sample_count");

  it.offline = readSearch(c, "offline");
  s.online = readSearch(c, "online");

  s.eval.seeds = positive(c, "eval.seeds");
  const auto mode = c.getString("eval.mode");
  if (mode == "search")
    s.eval.mode = EvalMode::Search;
  else if (mode == "raw_policy")
    s.eval.mode = EvalMode::RawPolicy;
  else if (mode == "raw_value")
    s.eval.mode = EvalMode::RawValue;
  else
    throw ConfigError("config key 'eval.mode' must be search, raw_policy or raw_value");

  if (isLightDark(env)) {
    auto& l = s.lavi.solver;
    l.samplesPerBelief = positive(c, "lavi.samples_per_belief");
    l.maxSweeps = positive(c, "lavi.sweeps");
    l.tolerance = c.getDouble("lavi.tolerance");
    l.reconstructionParticles = positive(c, "lavi.reconstruction_particles");
    s.lavi.evalSamples = positive(c, "lavi.eval_samples");
  }

  s.baseline.c = c.getDouble("baseline.c");
  s.baseline.rolloutDepth = positive(c, "baseline.rollout_depth");

  s.sweep.points = positive(c, "sweep.points");
  if (s.sweep.points < 2) throw ConfigError("config key 'sweep.points' must be at least 2");
  s.sweep.kStateMax = c.getDouble("sweep.k_state_max");
  s.sweep.kActionMax = c.getDouble("sweep.k_action_max");
  s.sweep.alphaMax = unitInterval(c, "sweep.alpha_max");
  s.sweep.seeds = positive(c, "sweep.seeds");

  s.ablate.arms = c.getStringList("ablate.arms");
  for (const auto& arm : s.ablate.arms)
    if (arm != "qweight" && arm != "representation" && arm != "widening" && arm != "zgrid")
      throw ConfigError("config key 'ablate.arms' has unknown arm '" + arm + "'");
  s.ablate.gridPoints = positive(c, "ablate.grid_points");
  if (s.ablate.gridPoints < 2) throw ConfigError("config key 'ablate.grid_points' must be >= 2");
  s.ablate.gridSeeds = positive(c, "ablate.grid_seeds");

  c.rejectUnused();
  return s;
}

NetworkSpec networkSpec(const Settings& s, int inputDim, int numActions) {
  NetworkSpec spec;
  spec.inputDim = inputDim;
  spec.numActions = numActions;
  spec.trunkWidths = s.trunkWidths;
  spec.headWidths = s.headWidths;
  spec.batchNorm = s.batchNorm;
  spec.dropout = s.dropout;
  spec.batchNormMomentum = s.batchNormMomentum;
  return spec;
}

}  // namespace betazero::cli
