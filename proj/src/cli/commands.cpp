#include "betazero/cli/commands.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>

#include "betazero/cli/settings.hpp"

#ifndef BETAZERO_CONFIG_DIR
#define BETAZERO_CONFIG_DIR "configs"
#endif

namespace fs = std::filesystem;

namespace betazero::cli {

std::string presetDirectory() {
  if (const char* env = std::getenv("BETAZERO_CONFIG_DIR")) return env;
  return BETAZERO_CONFIG_DIR;
}

std::string presetPath(const std::string& env, const std::string& preset) {
  return (fs::path(presetDirectory()) / (env + "-" + preset + ".toml")).string();
}

namespace {

class Unsupported : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// CSV file with a versioned schema comment followed by a header row.
class CsvWriter {
 public:
  CsvWriter(const fs::path& path, const std::string& schema, const std::string& header)
      : out_(path) {
    if (!out_) throw std::runtime_error("cannot write " + path.string());
    out_ << "# betazero " << schema << " v1\n" << header << '\n';
    out_ << std::setprecision(10);
  }
  template <class... Ts>
  void row(const Ts&... fields) {
    bool first = true;
    ((out_ << (first ? "" : ",") << fields, first = false), ...);
    out_ << '\n';
    out_.flush();
  }

 private:
  std::ofstream out_;
};

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = lo + (hi - lo) * i / (n - 1);
  return v;
}

std::string modeName(EvalMode m) {
  switch (m) {
    case EvalMode::Search:
      return "search";
    case EvalMode::RawPolicy:
      return "raw_policy";
    case EvalMode::RawValue:
      return "raw_value";
  }
  return {};
}

EvalMode parseMode(const std::string& m) {
  if (m == "search") return EvalMode::Search;
  if (m == "raw_policy") return EvalMode::RawPolicy;
  if (m == "raw_value") return EvalMode::RawValue;
  throw ConfigError("unknown evaluation method '" + m + "'");
}

template <GenerativePomdp P>
class Runner {
 public:
  Runner(const P& problem, Settings settings, const Options& opts, fs::path out)
      : problem_(problem), s_(std::move(settings)), opts_(opts), out_(std::move(out)) {
    s_.iteration.masterSeed = opts.seed;
    s_.iteration.workers = opts.workers;
  }

  int run() {
    const auto& c = opts_.command;
    if (c == "train") return train();
    if (c == "evaluate") return evaluate();
    if (c == "lavi") return lavi();
    if (c == "baseline") return baseline();
    if (c == "ablate") return ablate();
    if (c == "sweep") return sweep();
    throw ConfigError("unknown command '" + c + "'");
  }

 private:
  int seeds(int fromConfig) const { return opts_.nSeeds > 0 ? opts_.nSeeds : fromConfig; }

  PolicyValueNetd freshNet(RepresentationMode mode) const {
    Rng rng(initSeed(opts_.seed));
    return PolicyValueNetd(
        networkSpec(s_, representationSize(problem_, mode), problem_.numActions()), rng);
  }

  PolicyValueNetd loadNet() const {
    if (opts_.checkpoint.empty()) throw ConfigError("this command needs --checkpoint");
    auto net = loadCheckpoint(opts_.checkpoint);
    const int expected = representationSize(problem_, s_.iteration.episode.mode);
    if (net.spec().inputDim != expected || net.spec().numActions != problem_.numActions())
      throw ConfigError("checkpoint does not match the environment and representation");
    return net;
  }

  int train() {
    auto net = freshNet(s_.iteration.episode.mode);
    fs::create_directories(out_ / "checkpoints");
    CsvWriter csv(out_ / "metrics.csv", "metrics",
                  "iteration,meanHoldoutReturn,stdErr,policyLoss,valueLoss,bufferSize,"
                  "wallClockSeconds");
    policyIteration(problem_, net, s_.iteration,
                    [&](const IterationMetrics& m, const PolicyValueNetd& snapshot) {
                      csv.row(m.iteration, m.meanHoldoutReturn, m.stdErr, m.policyLoss,
                              m.valueLoss, m.bufferSize, m.wallClockSeconds);
                      std::ostringstream name;
                      name << "iteration_" << std::setw(3) << std::setfill('0') << m.iteration
                           << ".ckpt";
                      saveCheckpoint(snapshot, (out_ / "checkpoints" / name.str()).string());
                      std::cerr << "iteration " << m.iteration << ": holdout "
                                << m.meanHoldoutReturn << " +/- " << m.stdErr << '\n';
                    });
    return kOk;
  }

  EvalConfig evalConfig(const SearchConfig& search, int nSeeds) const {
    EvalConfig ec;
    ec.search = search;
    ec.nSeeds = nSeeds;
    ec.workers = opts_.workers;
    ec.masterSeed = opts_.seed;
    ec.episode = s_.iteration.episode;
    return ec;
  }

  int evaluate() {
    const auto net = loadNet();
    auto ec = evalConfig(s_.online, seeds(s_.eval.seeds));
    ec.mode = opts_.method.empty() ? s_.eval.mode : parseMode(opts_.method);
    const auto r = evaluatePolicy(problem_, net, ec);
    CsvWriter csv(out_ / "eval.csv", "eval", "env,method,mean,stdErr,nSeeds,failed");
    csv.row(envName(s_.env), modeName(ec.mode), r.mean, r.stdErr, ec.nSeeds, r.failed);
    std::cerr << modeName(ec.mode) << ": " << r.mean << " +/- " << r.stdErr << '\n';
    return kOk;
  }

  int lavi() {
    if constexpr (std::is_same_v<P, LightDark>) {
      runLavi("eval.csv", "eval");
      return kOk;
    } else {
      throw Unsupported("LAVI is unsupported for " + envName(s_.env));
    }
  }

  void runLavi(const std::string& file, const std::string& schema) {
    if constexpr (std::is_same_v<P, LightDark>) {
      auto cfg = s_.lavi.solver;
      cfg.seed = deriveSeed(opts_.seed, 0, 5);
      cfg.workers = opts_.workers;
      const auto sol = solveLavi(problem_, cfg);
      std::ofstream grid(out_ / "lavi_grid.csv");
      writeLaviGridCsv(grid, sol);
      const int n = seeds(s_.eval.seeds);
      const auto r = evaluateLavi(problem_, sol.grid, n, opts_.seed, s_.lavi.evalSamples,
                                  opts_.workers, s_.iteration.episode);
      CsvWriter csv(out_ / file, schema, "env,method,mean,stdErr,nSeeds,failed");
      csv.row(envName(s_.env), "lavi", r.mean, r.stdErr, n, r.failed);
      std::cerr << "lavi: " << r.mean << " +/- " << r.stdErr << '\n';
    }
  }

  int baseline() {
    const std::string method = opts_.method.empty() ? "rollout" : opts_.method;
    if (method == "lavi") {
      if (!std::is_same_v<P, LightDark>)
        throw Unsupported("LAVI baseline is unsupported for " + envName(s_.env));
      runLavi("baseline.csv", "baseline");
      return kOk;
    }
    if (method != "rollout") throw ConfigError("unknown baseline method '" + method + "'");
    SearchConfig cfg = s_.online;
    cfg.c = s_.baseline.c;
    cfg.finalCriterion = FinalCriterion::Argmax;
    const int depth = s_.baseline.rolloutDepth;
    const int n = seeds(s_.eval.seeds);
    const std::function<ActionIndex(const ParticleBelief<typename P::State>&, std::uint64_t)>
        policy = [&](const ParticleBelief<typename P::State>& b, std::uint64_t stepSeed) {
          return rolloutBaselinePlan(problem_, b, cfg, depth, stepSeed);
        };
    const auto r =
        evaluateSelector(problem_, policy, n, opts_.seed, opts_.workers, s_.iteration.episode);
    CsvWriter csv(out_ / "baseline.csv", "baseline", "env,method,mean,stdErr,nSeeds,failed");
    csv.row(envName(s_.env), "rollout", r.mean, r.stdErr, n, r.failed);
    std::cerr << "rollout: " << r.mean << " +/- " << r.stdErr << '\n';
    return kOk;
  }

  struct ArmResult {
    double mean = 0.0;
    double stdErr = 0.0;
  };

  /// Trains with a modified iteration config and reports the final holdout.
  ArmResult trainArm(IterationConfig cfg) {
    auto net = freshNet(cfg.episode.mode);
    const auto log = policyIteration(problem_, net, cfg);
    if (log.empty()) return {};
    return {log.back().meanHoldoutReturn, log.back().stdErr};
  }

  int ablate() {
    CsvWriter csv(out_ / "ablate.csv", "ablate", "arm,variant,z_q,z_n,mean,stdErr,nSeeds");
    const auto& base = s_.iteration;
    std::map<std::string, ArmResult> cache;
    auto reference = [&]() -> const ArmResult& {
      if (!cache.count("reference")) cache["reference"] = trainArm(base);
      return cache["reference"];
    };
    const int holdout = base.holdoutEpisodes;
    for (const auto& arm : s_.ablate.arms) {
      if (arm == "qweight") {
        auto counts = base;
        counts.offline.zQ = 0.0;
        counts.offline.zN = 1.0;
        const auto r = trainArm(counts);
        csv.row(arm, "counts", 0.0, 1.0, r.mean, r.stdErr, holdout);
        const auto& q = reference();
        csv.row(arm, "qweighted", base.offline.zQ, base.offline.zN, q.mean, q.stdErr, holdout);
      } else if (arm == "representation") {
        const auto& full = reference();
        csv.row(arm, "mean_std", base.offline.zQ, base.offline.zN, full.mean, full.stdErr,
                holdout);
        auto meanOnly = base;
        meanOnly.episode.mode = RepresentationMode::MeanOnly;
        const auto r = trainArm(meanOnly);
        csv.row(arm, "mean", base.offline.zQ, base.offline.zN, r.mean, r.stdErr, holdout);
      } else if (arm == "widening") {
        const auto& prior = reference();
        csv.row(arm, "prior", base.offline.zQ, base.offline.zN, prior.mean, prior.stdErr,
                holdout);
        auto uniform = base;
        uniform.offline.uniformWidening = true;
        const auto r = trainArm(uniform);
        csv.row(arm, "uniform", base.offline.zQ, base.offline.zN, r.mean, r.stdErr, holdout);
      } else if (arm == "zgrid") {
        const auto net = loadNet();
        const auto grid = linspace(0.0, 1.0, s_.ablate.gridPoints);
        for (double zq : grid) {
          for (double zn : grid) {
            auto search = s_.online;
            search.zQ = zq;
            search.zN = zn;
            const auto r = evaluatePolicy(problem_, net, evalConfig(search, s_.ablate.gridSeeds));
            csv.row(arm, "grid", zq, zn, r.mean, r.stdErr, s_.ablate.gridSeeds);
          }
        }
      }
    }
    return kOk;
  }

  int sweep() {
    const auto net = loadNet();
    const auto alphas = linspace(0.0, s_.sweep.alphaMax, s_.sweep.points);
    for (const bool state : {true, false}) {
      const auto ks = linspace(0.0, state ? s_.sweep.kStateMax : s_.sweep.kActionMax,
                               s_.sweep.points);
      CsvWriter csv(out_ / (state ? "sweep_state.csv" : "sweep_action.csv"),
                    state ? "sweep_state" : "sweep_action", "k,alpha,mean,stdErr,nSeeds");
      for (double k : ks) {
        for (double alpha : alphas) {
          auto search = s_.online;
          (state ? search.kState : search.kAction) = k;
          (state ? search.alphaState : search.alphaAction) = alpha;
          if (state) search.stateWidening = true;
          else search.actionWidening = true;
          const auto r = evaluatePolicy(problem_, net, evalConfig(search, s_.sweep.seeds));
          csv.row(k, alpha, r.mean, r.stdErr, s_.sweep.seeds);
        }
      }
    }
    return kOk;
  }

  const P& problem_;
  Settings s_;
  const Options& opts_;
  fs::path out_;
};

int dispatch(const Options& opts) {
  const auto env = parseEnv(opts.env);
  const auto path = opts.configPath.empty() ? presetPath(opts.env, opts.preset) : opts.configPath;
  const auto config = Config::load(path);
  auto settings = readSettings(config, env);
  if (opts.workers < 1) throw ConfigError("--workers must be at least 1");

  const fs::path out(opts.outDir);
  fs::create_directories(out);
  {
    std::ofstream copy(out / "config.toml", std::ios::binary);
    copy << config.text();
  }
  if (isLightDark(env)) {
    const LightDark problem(settings.lightDark);
    return Runner<LightDark>(problem, std::move(settings), opts, out).run();
  }
  const RockSample problem(settings.rockSample);
  return Runner<RockSample>(problem, std::move(settings), opts, out).run();
}

}  // namespace

int runCommand(const Options& opts) {
  try {
    return dispatch(opts);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfigError;
  } catch (const Unsupported& e) {
    std::cerr << "error: unsupported: " << e.what() << '\n';
    return kConfigError;
  } catch (const Divergence& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kDivergence;
  } catch (const DataStarvation& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kDataStarvation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfigError;
  }
}

}  // namespace betazero::cli
