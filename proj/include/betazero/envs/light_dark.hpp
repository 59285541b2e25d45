#pragma once

#include <cmath>
#include <optional>
#include <span>

#include "betazero/pomdp.hpp"
#include "betazero/random.hpp"

namespace betazero {

struct LightDarkState {
  double y = 0.0;
  bool terminal = false;

  friend bool operator==(const LightDarkState&, const LightDarkState&) = default;
};

/// One-dimensional localization problem with a low-noise "light" band.
/// Observation noise std is |y - lightY| * noiseSlope + noiseFloor.
struct LightDarkParams {
  double lightY = 10.0;
  double noiseSlope = 1.0;
  double noiseFloor = 1e-4;
  double rewardCorrect = 100.0;
  double rewardWrong = -100.0;
  double goalRadius = 1.0;
  double discount = 0.9;
  int maxSteps = 60;
  double initialMean = 2.0;
  double initialStd = 2.0;
  std::optional<double> initialLow;
  std::optional<double> initialHigh;

  static LightDarkParams lightDark10();
  static LightDarkParams lightDark5();
};

struct LightDarkStep {
  double y = 0.0;
  double reward = 0.0;
  bool terminal = false;
};

class LightDark {
 public:
  using State = LightDarkState;
  using Observation = double;
  static constexpr bool kRewardUsesNextState = false;

  static constexpr ActionIndex kDown = 0;
  static constexpr ActionIndex kStop = 1;
  static constexpr ActionIndex kUp = 2;

  explicit LightDark(LightDarkParams params = LightDarkParams::lightDark10());

  const LightDarkParams& params() const noexcept { return params_; }
  int numActions() const noexcept { return 3; }
  double discount() const noexcept { return params_.discount; }
  int maxSteps() const noexcept { return params_.maxSteps; }

  /// Displacement of each action: down -1, stop 0, up +1.
  static constexpr double displacement(ActionIndex a) { return static_cast<double>(a) - 1.0; }

  double noiseStd(double y) const noexcept {
    return std::abs(y - params_.lightY) * params_.noiseSlope + params_.noiseFloor;
  }

  LightDarkStep step(double y, ActionIndex a) const;

  State sampleInitialState(Rng& rng) const;
  State sampleTransition(const State& s, ActionIndex a, Rng& rng) const;
  Observation sampleObservation(ActionIndex a, const State& next, Rng& rng) const;
  double reward(const State& s, ActionIndex a) const;
  double reward(const State& s, ActionIndex a, const State&) const { return reward(s, a); }
  double logObservationDensity(Observation o, ActionIndex a, const State& next) const;
  double observationDensity(Observation o, ActionIndex a, const State& next) const {
    return std::exp(logObservationDensity(o, a, next));
  }
  double observationDistance(Observation a, Observation b) const { return std::abs(a - b); }
  bool isTerminal(const State& s) const noexcept { return s.terminal; }

  int featureCount() const noexcept { return 1; }
  int extraCount() const noexcept { return 0; }
  void features(const State& s, std::span<double> out) const { out[0] = s.y; }
  void extras(const State&, std::span<double>) const {}

 private:
  LightDarkParams params_;
};

/// o ~ N(y, sigma(y)^2).
double lightDarkObservation(double y, const LightDark& problem, Rng& rng);

}  // namespace betazero
