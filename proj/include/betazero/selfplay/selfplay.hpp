#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <deque>
#include <functional>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "betazero/belief_mdp.hpp"
#include "betazero/mcts/guides.hpp"
#include "betazero/nnet/train.hpp"
#include "betazero/parallel.hpp"

namespace betazero {

/// Training samples of the most recent `depth` iterations, capped FIFO at
/// `capacity` samples.
class ExperienceBuffer {
 public:
  explicit ExperienceBuffer(std::size_t capacity = 100000, int depth = 1)
      : capacity_(capacity), depth_(depth) {
    if (capacity == 0 || depth < 1) throw std::invalid_argument("ExperienceBuffer: bad size");
  }

  void addIteration(std::vector<Sample> samples) {
    iterations_.push_back(std::move(samples));
    while (static_cast<int>(iterations_.size()) > depth_) iterations_.pop_front();
    std::size_t total = size();
    while (total > capacity_) {
      auto& oldest = iterations_.front();
      const std::size_t drop = std::min(oldest.size(), total - capacity_);
      oldest.erase(oldest.begin(), oldest.begin() + static_cast<std::ptrdiff_t>(drop));
      total -= drop;
      if (oldest.empty()) iterations_.pop_front();
    }
  }

  std::vector<Sample> samples() const {
    std::vector<Sample> out;
    for (const auto& it : iterations_) out.insert(out.end(), it.begin(), it.end());
    return out;
  }

  std::size_t size() const {
    std::size_t n = 0;
    for (const auto& it : iterations_) n += it.size();
    return n;
  }
  std::size_t capacity() const noexcept { return capacity_; }

 private:
  std::size_t capacity_;
  int depth_;
  std::deque<std::vector<Sample>> iterations_;
};

class DataStarvation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Episode seed streams. Data episodes are distinct per iteration; holdout
/// and evaluation episodes reuse the same seeds across iterations and methods.
inline std::uint64_t dataSeed(std::uint64_t master, int iteration, int nData, int episode) {
  return deriveSeed(master, static_cast<std::uint64_t>(iteration) * nData + episode, 0);
}
inline std::uint64_t holdoutSeed(std::uint64_t master, int episode) {
  return deriveSeed(master, episode, 1);
}
inline std::uint64_t trainingSeed(std::uint64_t master, int iteration) {
  return deriveSeed(master, iteration, 2);
}
inline std::uint64_t evaluationSeed(std::uint64_t master, int episode) {
  return deriveSeed(master, episode, 3);
}
inline std::uint64_t initSeed(std::uint64_t master) { return deriveSeed(master, 0, 4); }

struct CollectConfig {
  int nData = 100;
  int workers = 1;
  std::uint64_t masterSeed = 0;
  int iteration = 0;
  SearchConfig search;
  EpisodeOptions episode;
  double maxDropFraction = 0.2;
};

struct CollectResult {
  std::vector<Sample> samples;
  std::vector<EpisodeRecord> episodes;  // successful episodes in index order
  int dropped = 0;
};

/// Self-play episodes with MCTS, merged by episode index so the result does
/// not depend on the worker count.
template <GenerativePomdp P>
CollectResult collectData(const P& problem, const PolicyValueNetd& net, const CollectConfig& cfg) {
  std::vector<std::optional<EpisodeRecord>> records(cfg.nData);
  const ActionSelector<typename P::State> select =
      [&](const ParticleBelief<typename P::State>& b, std::uint64_t stepSeed) {
        const auto r = betaZeroPlan(problem, b, net, cfg.search, stepSeed, cfg.episode.mode);
        return Decision{r.action, r.policy};
      };
  parallelFor(cfg.nData, cfg.workers, [&](int i) {
    try {
      records[i] = runEpisode(problem, select,
                              dataSeed(cfg.masterSeed, cfg.iteration, cfg.nData, i), cfg.episode);
    } catch (const EpisodeError&) {
      records[i].reset();
    }
  });

  CollectResult out;
  for (auto& r : records) {
    if (!r) {
      ++out.dropped;
      continue;
    }
    for (std::size_t t = 0; t < r->steps.size(); ++t)
      out.samples.push_back({r->steps[t].representation, r->steps[t].policy, r->returns[t]});
    out.episodes.push_back(std::move(*r));
  }
  if (out.dropped > cfg.maxDropFraction * cfg.nData)
    throw DataStarvation("data collection dropped " + std::to_string(out.dropped) + " of " +
                         std::to_string(cfg.nData) + " episodes");
  return out;
}

enum class EvalMode { Search, RawPolicy, RawValue };

struct EvalConfig {
  EvalMode mode = EvalMode::Search;
  SearchConfig search;
  int nSeeds = 100;
  int workers = 1;
  std::uint64_t masterSeed = 0;
  EpisodeOptions episode;
  int observationsPerAction = 5;
  /// Seed stream for episode i; defaults to evaluationSeed.
  std::function<std::uint64_t(int)> seedFor;
};

struct EvalResult {
  double mean = 0.0;
  double stdErr = 0.0;
  std::vector<double> returns;
  int failed = 0;
  long decisions = 0;
  long beliefUpdates = 0;
};

/// Mean and standard error (sample std / sqrt n) of a list of returns.
inline std::pair<double, double> meanAndStdErr(const std::vector<double>& xs) {
  if (xs.empty()) return {0.0, 0.0};
  const double n = static_cast<double>(xs.size());
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  if (xs.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / (n - 1.0)) / std::sqrt(n)};
}

/// One-step lookahead over every action with the value head: Q(b, a) is
/// R_b(b, a) plus gamma times the mean V over `nObs` sampled successors.
template <GenerativePomdp P>
ActionIndex rawValueAction(const P& problem, const ParticleBelief<typename P::State>& b,
                           const PolicyValueNetd& net, const EvalConfig& cfg, Rng& rng,
                           long& updates) {
  const int nA = problem.numActions();
  Eigen::VectorXd q(nA);
  for (ActionIndex a = 0; a < nA; ++a) {
    const double r = beliefReward(problem, b, a, rng);
    double v = 0.0;
    for (int k = 0; k < cfg.observationsPerAction; ++k) {
      const auto& s = b.particles[uniformIndex(rng, static_cast<int>(b.size()))];
      const auto next = problem.sampleTransition(s, a, rng);
      const auto obs = problem.sampleObservation(a, next, rng);
      ++updates;
      try {
        const auto bn = updateBelief(problem, b, a, obs, rng, cfg.episode.update);
        if (!problem.isTerminal(next))
          v += net.forward(represent(problem, bn, cfg.episode.mode)).value;
      } catch (const ParticleDepletion&) {
      }
    }
    q[a] = r + problem.discount() * v / cfg.observationsPerAction;
  }
  return argmaxLowest(q);
}

/// Runs nSeeds episodes with the argmax criterion (or a raw network mode).
template <GenerativePomdp P>
EvalResult evaluatePolicy(const P& problem, const PolicyValueNetd& net, const EvalConfig& cfg) {
  SearchConfig search = cfg.search;
  search.finalCriterion = FinalCriterion::Argmax;
  const int nA = problem.numActions();
  std::vector<std::optional<double>> returns(cfg.nSeeds);
  std::vector<long> decisions(cfg.nSeeds, 0), updates(cfg.nSeeds, 0);

  parallelFor(cfg.nSeeds, cfg.workers, [&](int i) {
    const ActionSelector<typename P::State> select =
        [&](const ParticleBelief<typename P::State>& b, std::uint64_t stepSeed) {
          ++decisions[i];
          if (cfg.mode == EvalMode::Search) {
            const auto r = betaZeroPlan(problem, b, net, search, stepSeed, cfg.episode.mode);
            return Decision{r.action, r.policy};
          }
          if (cfg.mode == EvalMode::RawPolicy) {
            const auto out = net.forward(represent(problem, b, cfg.episode.mode));
            const int a = argmaxLowest(out.policy);
            return Decision{a, oneHot(nA, a)};
          }
          Rng rng(stepSeed);
          const int a = rawValueAction(problem, b, net, cfg, rng, updates[i]);
          return Decision{a, oneHot(nA, a)};
        };
    const auto seed = cfg.seedFor ? cfg.seedFor(i) : evaluationSeed(cfg.masterSeed, i);
    try {
      returns[i] = runEpisode(problem, select, seed, cfg.episode).totalReturn();
    } catch (const EpisodeError&) {
      returns[i].reset();
    }
  });

  EvalResult out;
  for (int i = 0; i < cfg.nSeeds; ++i) {
    out.decisions += decisions[i];
    out.beliefUpdates += updates[i];
    if (returns[i])
      out.returns.push_back(*returns[i]);
    else
      ++out.failed;
  }
  std::tie(out.mean, out.stdErr) = meanAndStdErr(out.returns);
  return out;
}

/// Evaluates an arbitrary selector with the same seed protocol.
template <GenerativePomdp P>
EvalResult evaluateSelector(const P& problem,
                            const std::function<ActionIndex(const ParticleBelief<typename P::State>&,
                                                            std::uint64_t)>& policy,
                            int nSeeds, std::uint64_t masterSeed, int workers,
                            const EpisodeOptions& episode) {
  const int nA = problem.numActions();
  std::vector<std::optional<double>> returns(nSeeds);
  parallelFor(nSeeds, workers, [&](int i) {
    const ActionSelector<typename P::State> select =
        [&](const ParticleBelief<typename P::State>& b, std::uint64_t stepSeed) {
          const int a = policy(b, stepSeed);
          return Decision{a, oneHot(nA, a)};
        };
    try {
      returns[i] =
          runEpisode(problem, select, evaluationSeed(masterSeed, i), episode).totalReturn();
    } catch (const EpisodeError&) {
      returns[i].reset();
    }
  });
  EvalResult out;
  for (const auto& r : returns) {
    if (r)
      out.returns.push_back(*r);
    else
      ++out.failed;
  }
  std::tie(out.mean, out.stdErr) = meanAndStdErr(out.returns);
  return out;
}

struct IterationConfig {
  int nIterations = 30;
  int nData = 500;
  int workers = 1;
  std::uint64_t masterSeed = 0;
  SearchConfig offline;
  TrainConfig train;
  int holdoutEpisodes = 50;
  EpisodeOptions episode;
  std::size_t bufferCapacity = 100000;
  int bufferDepth = 1;
};

struct IterationMetrics {
  int iteration = 0;
  double meanHoldoutReturn = 0.0;
  double stdErr = 0.0;
  double policyLoss = 0.0;
  double valueLoss = 0.0;
  double validationLoss = 0.0;
  std::size_t bufferSize = 0;
  int droppedEpisodes = 0;
  double wallClockSeconds = 0.0;
};

using IterationCallback = std::function<void(const IterationMetrics&, const PolicyValueNetd&)>;

/// Offline policy iteration: collect self-play data with the current
/// network, retrain on the buffer, then score a holdout set with the argmax
/// criterion. On divergence `net` is restored to its last good state and the
/// Divergence is rethrown.
template <GenerativePomdp P>
std::vector<IterationMetrics> policyIteration(const P& problem, PolicyValueNetd& net,
                                              const IterationConfig& cfg,
                                              const IterationCallback& onIteration = {}) {
  std::vector<IterationMetrics> log;
  ExperienceBuffer buffer(cfg.bufferCapacity, cfg.bufferDepth);
  for (int it = 1; it <= cfg.nIterations; ++it) {
    const auto start = std::chrono::steady_clock::now();
    CollectConfig cc;
    cc.nData = cfg.nData;
    cc.workers = cfg.workers;
    cc.masterSeed = cfg.masterSeed;
    cc.iteration = it;
    cc.search = cfg.offline;
    cc.episode = cfg.episode;
    auto data = collectData(problem, net, cc);
    buffer.addIteration(std::move(data.samples));

    const PolicyValueNetd lastGood = net;
    Rng trainRng(trainingSeed(cfg.masterSeed, it));
    TrainReport report;
    try {
      report = trainNetwork(net, buffer.samples(), cfg.train, trainRng);
    } catch (const Divergence&) {
      net = lastGood;
      throw;
    }

    EvalConfig ec;
    ec.search = cfg.offline;
    ec.nSeeds = cfg.holdoutEpisodes;
    ec.workers = cfg.workers;
    ec.masterSeed = cfg.masterSeed;
    ec.episode = cfg.episode;
    ec.seedFor = [&](int i) { return holdoutSeed(cfg.masterSeed, i); };
    const auto holdout = evaluatePolicy(problem, net, ec);

    IterationMetrics m;
    m.iteration = it;
    m.meanHoldoutReturn = holdout.mean;
    m.stdErr = holdout.stdErr;
    m.policyLoss = report.lastEpoch.policy;
    m.valueLoss = report.lastEpoch.value;
    m.validationLoss = report.validation.total;
    m.bufferSize = buffer.size();
    m.droppedEpisodes = data.dropped;
    m.wallClockSeconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    log.push_back(m);
    if (onIteration) onIteration(m, net);
  }
  return log;
}

}  // namespace betazero
