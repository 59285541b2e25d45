#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <ostream>
#include <vector>

#include "betazero/belief.hpp"
#include "betazero/pomdp.hpp"

namespace betazero {

/// R_b(b, a): particle-weighted expected reward. For rewards that depend on
/// the next state, one successor is sampled per particle.
template <GenerativePomdp P>
double beliefReward(const P& problem, const ParticleBelief<typename P::State>& belief,
                    ActionIndex action, Rng& rng) {
  if (belief.empty()) throw std::invalid_argument("beliefReward: degenerate belief");
  double total = 0.0;
  for (std::size_t i = 0; i < belief.size(); ++i) {
    const auto& s = belief.particles[i];
    double r;
    if constexpr (P::kRewardUsesNextState) {
      r = problem.reward(s, action, problem.sampleTransition(s, action, rng));
    } else {
      r = problem.reward(s, action);
    }
    total += (P::kRewardUsesNextState ? 1.0 / belief.size() : belief.weights[i]) * r;
  }
  return total;
}

/// One draw b' ~ T_b(. | b, a) together with whether the generating s' was
/// terminal.
template <class State>
struct BeliefTransition {
  ParticleBelief<State> belief;
  bool terminal = false;
};

template <GenerativePomdp P>
BeliefTransition<typename P::State> sampleBeliefTransition(
    const P& problem, const ParticleBelief<typename P::State>& belief, ActionIndex action,
    Rng& rng, const UpdateOptions& options = {}) {
  const auto& s = belief.particles[uniformIndex(rng, static_cast<int>(belief.size()))];
  const auto next = problem.sampleTransition(s, action, rng);
  const auto obs = problem.sampleObservation(action, next, rng);
  return {updateBelief(problem, belief, action, obs, rng, options), problem.isTerminal(next)};
}

/// Output of an action selector: the chosen action and the distribution it
/// was drawn from (one-hot for deterministic selectors).
struct Decision {
  ActionIndex action = 0;
  Eigen::VectorXd policy;
};

struct EpisodeStep {
  Eigen::VectorXd representation;
  Eigen::VectorXd policy;
  ActionIndex action = 0;
  double reward = 0.0;
};

struct EpisodeRecord {
  std::vector<EpisodeStep> steps;
  std::vector<double> returns;
  std::uint64_t seed = 0;

  double totalReturn() const { return returns.empty() ? 0.0 : returns.front(); }
};

struct EpisodeOptions {
  int nParticles = 500;
  RepresentationMode mode = RepresentationMode::MeanStd;
  UpdateOptions update;
};

template <class State>
using ActionSelector = std::function<Decision(const ParticleBelief<State>&, std::uint64_t)>;

inline Eigen::VectorXd oneHot(int n, int index) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
  v[index] = 1.0;
  return v;
}

/// Simulates the true POMDP from a given state and initial belief.
template <GenerativePomdp P>
EpisodeRecord runEpisodeFrom(const P& problem, const ActionSelector<typename P::State>& select,
                             typename P::State state, ParticleBelief<typename P::State> belief,
                             Rng& rng, const EpisodeOptions& options, std::uint64_t seed = 0) {
  EpisodeRecord record;
  record.seed = seed;
  std::vector<double> rewards;
  for (int t = 0; t < problem.maxSteps(); ++t) {
    EpisodeStep step;
    step.representation = represent(problem, belief, options.mode);
    Decision decision = select(belief, rng());
    step.action = decision.action;
    step.policy = std::move(decision.policy);

    const auto next = problem.sampleTransition(state, step.action, rng);
    step.reward = problem.reward(state, step.action, next);
    rewards.push_back(step.reward);
    record.steps.push_back(std::move(step));
    if (problem.isTerminal(next)) break;

    const auto obs = problem.sampleObservation(record.steps.back().action, next, rng);
    try {
      belief = updateBelief(problem, belief, record.steps.back().action, obs, rng, options.update);
    } catch (const ParticleDepletion& e) {
      throw EpisodeError(t, e.what());
    }
    state = next;
  }
  record.returns = discountedReturns(rewards, problem.discount());
  return record;
}

/// Seeds every stochastic component of the episode from `seed`.
template <GenerativePomdp P>
EpisodeRecord runEpisode(const P& problem, const ActionSelector<typename P::State>& select,
                         std::uint64_t seed, const EpisodeOptions& options = {}) {
  Rng rng(seed);
  auto state = problem.sampleInitialState(rng);
  auto belief = sampleInitialBelief(problem, options.nParticles, rng);
  return runEpisodeFrom(problem, select, state, std::move(belief), rng, options, seed);
}

/// One row per step: t, representation..., policy..., r, g.
void writeEpisodeCsv(std::ostream& out, const EpisodeRecord& record);

}  // namespace betazero
