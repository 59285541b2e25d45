#pragma once

#include <concepts>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "betazero/random.hpp"

namespace betazero {

using ActionIndex = int;

/// Contract for a generative POMDP. Actions are addressed by index in
/// [0, numActions()). A belief representation is built from per-particle
/// stochastic features (summarized by mean and std) followed by
/// deterministic extras read from any single particle.
template <class P>
concept GenerativePomdp = requires(const P& p, const typename P::State& s,
                                   const typename P::Observation& o, ActionIndex a, Rng& rng,
                                   std::span<double> out) {
  typename P::State;
  typename P::Observation;
  { P::kRewardUsesNextState } -> std::convertible_to<bool>;
  { p.numActions() } -> std::convertible_to<int>;
  { p.discount() } -> std::convertible_to<double>;
  { p.maxSteps() } -> std::convertible_to<int>;
  { p.sampleInitialState(rng) } -> std::same_as<typename P::State>;
  { p.sampleTransition(s, a, rng) } -> std::same_as<typename P::State>;
  { p.sampleObservation(a, s, rng) } -> std::same_as<typename P::Observation>;
  { p.reward(s, a, s) } -> std::convertible_to<double>;
  { p.logObservationDensity(o, a, s) } -> std::convertible_to<double>;
  { p.isTerminal(s) } -> std::convertible_to<bool>;
  { p.featureCount() } -> std::convertible_to<int>;
  { p.extraCount() } -> std::convertible_to<int>;
  p.features(s, out);
  p.extras(s, out);
};

/// Raised when every particle receives zero weight during a belief update.
class ParticleDepletion : public std::runtime_error {
 public:
  explicit ParticleDepletion(double maxDensity)
      : std::runtime_error("particle depletion (max raw density " + std::to_string(maxDensity) +
                           ")"),
        maxDensity_(maxDensity) {}
  double maxDensity() const noexcept { return maxDensity_; }

 private:
  double maxDensity_;
};

/// An episode aborted by a belief-update failure at `step`.
class EpisodeError : public std::runtime_error {
 public:
  EpisodeError(int step, const std::string& what)
      : std::runtime_error("episode failed at step " + std::to_string(step) + ": " + what),
        step_(step) {}
  int step() const noexcept { return step_; }

 private:
  int step_;
};

/// g_t = r_t + gamma * g_{t+1}, computed backwards.
inline std::vector<double> discountedReturns(std::span<const double> rewards, double gamma) {
  if (rewards.empty()) throw std::invalid_argument("discountedReturns: empty reward list");
  if (!(gamma >= 0.0 && gamma < 1.0))
    throw std::invalid_argument("discountedReturns: discount must lie in [0, 1)");
  std::vector<double> g(rewards.size());
  double acc = 0.0;
  for (std::size_t i = rewards.size(); i-- > 0;) {
    acc = rewards[i] + gamma * acc;
    g[i] = acc;
  }
  return g;
}

}  // namespace betazero
