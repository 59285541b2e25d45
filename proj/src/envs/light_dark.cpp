#include "betazero/envs/light_dark.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace betazero {

LightDarkParams LightDarkParams::lightDark10() {
  LightDarkParams p;
  p.lightY = 10.0;
  p.noiseSlope = 1.0;
  p.noiseFloor = 1e-4;
  p.initialLow = -3.0;
  p.initialHigh = 12.0;
  return p;
}

// Rewards are +/-10 here: the published LightDark(5) returns (about 4) only
// fit that scale.
LightDarkParams LightDarkParams::lightDark5() {
  LightDarkParams p;
  p.lightY = 5.0;
  p.noiseSlope = 1.0 / std::numbers::sqrt2;
  p.noiseFloor = 1e-2;
  p.rewardCorrect = 10.0;
  p.rewardWrong = -10.0;
  return p;
}

LightDark::LightDark(LightDarkParams params) : params_(params) {
  if (!(params_.discount >= 0.0 && params_.discount < 1.0))
    throw std::invalid_argument("LightDark: discount must lie in [0, 1)");
  if (params_.maxSteps <= 0) throw std::invalid_argument("LightDark: maxSteps must be positive");
  if (params_.noiseFloor <= 0.0)
    throw std::invalid_argument("LightDark: observation noise must be strictly positive");
}

LightDarkStep LightDark::step(double y, ActionIndex a) const {
  if (a < 0 || a > 2) throw std::out_of_range("LightDark: invalid action");
  if (a == kStop) {
    const bool atGoal = std::abs(y) <= params_.goalRadius;
    return {y, atGoal ? params_.rewardCorrect : params_.rewardWrong, true};
  }
  return {y + displacement(a), 0.0, false};
}

LightDark::State LightDark::sampleInitialState(Rng& rng) const {
  std::normal_distribution<double> normal(params_.initialMean, params_.initialStd);
  const double lo = params_.initialLow.value_or(-std::numeric_limits<double>::infinity());
  const double hi = params_.initialHigh.value_or(std::numeric_limits<double>::infinity());
  for (;;) {
    const double y = normal(rng);
    if (y >= lo && y <= hi) return {y, false};
  }
}

LightDark::State LightDark::sampleTransition(const State& s, ActionIndex a, Rng&) const {
  if (s.terminal) return s;
  const auto out = step(s.y, a);
  return {out.y, out.terminal};
}

LightDark::Observation LightDark::sampleObservation(ActionIndex, const State& next,
                                                    Rng& rng) const {
  return next.y + noiseStd(next.y) * standardNormal(rng);
}

double LightDark::reward(const State& s, ActionIndex a) const {
  if (s.terminal) return 0.0;
  return step(s.y, a).reward;
}

double LightDark::logObservationDensity(Observation o, ActionIndex, const State& next) const {
  const double sigma = noiseStd(next.y);
  const double z = (o - next.y) / sigma;
  return -0.5 * z * z - std::log(sigma) - 0.5 * std::log(2.0 * std::numbers::pi);
}

double lightDarkObservation(double y, const LightDark& problem, Rng& rng) {
  return problem.sampleObservation(LightDark::kUp, LightDarkState{y, false}, rng);
}

}  // namespace betazero
