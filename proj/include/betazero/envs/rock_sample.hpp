#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "betazero/pomdp.hpp"
#include "betazero/random.hpp"

namespace betazero {

struct GridCell {
  int x = 0;
  int y = 0;
  friend bool operator==(const GridCell&, const GridCell&) = default;
};

/// Agent position (fully observed) plus one quality bit per rock.
struct RockSampleState {
  std::int16_t x = 0;
  std::int16_t y = 0;
  std::uint32_t goodRocks = 0;
  bool terminal = false;

  bool good(int rock) const noexcept { return (goodRocks >> rock) & 1U; }
  friend bool operator==(const RockSampleState&, const RockSampleState&) = default;
};

enum class RockObservation : std::uint8_t { None = 0, Good = 1, Bad = 2 };

struct RockSampleParams {
  int gridSize = 15;
  int rockCount = 15;
  double sensorEfficiency = 20.0;
  double goodSampleReward = 10.0;
  double badSampleReward = -10.0;
  double exitReward = 10.0;
  double discount = 0.95;
  int maxSteps = 100;
  std::uint64_t layoutSeed = 1;
};

/// Sensor reports the true rock quality with probability
/// 0.5 * (1 + exp(-d log 2 / c)).
double rockSenseProbability(GridCell agent, GridCell rock, double efficiency);

/// Classic RockSample(n, k). Actions: north, south, east, west, sample,
/// then sense_0 .. sense_{k-1}. Moving east off the right edge exits.
class RockSample {
 public:
  using State = RockSampleState;
  using Observation = RockObservation;
  static constexpr bool kRewardUsesNextState = false;

  static constexpr ActionIndex kNorth = 0;
  static constexpr ActionIndex kSouth = 1;
  static constexpr ActionIndex kEast = 2;
  static constexpr ActionIndex kWest = 3;
  static constexpr ActionIndex kSample = 4;
  static constexpr ActionIndex kFirstSense = 5;

  explicit RockSample(RockSampleParams params = {});
  RockSample(RockSampleParams params, std::vector<GridCell> rocks);

  const RockSampleParams& params() const noexcept { return params_; }
  const std::vector<GridCell>& rocks() const noexcept { return rocks_; }
  GridCell start() const noexcept { return {0, params_.gridSize / 2}; }

  int numActions() const noexcept { return kFirstSense + params_.rockCount; }
  double discount() const noexcept { return params_.discount; }
  int maxSteps() const noexcept { return params_.maxSteps; }

  /// Number of non-terminal states: grid cells times rock configurations.
  std::uint64_t stateSpaceSize() const noexcept;

  /// Index of the rock at (x, y), or -1.
  int rockAt(int x, int y) const noexcept;

  struct StepResult {
    State next;
    double reward = 0.0;
    bool terminal = false;
  };
  StepResult step(const State& s, ActionIndex a) const;

  State sampleInitialState(Rng& rng) const;
  State sampleTransition(const State& s, ActionIndex a, Rng&) const { return step(s, a).next; }
  Observation sampleObservation(ActionIndex a, const State& next, Rng& rng) const;
  double reward(const State& s, ActionIndex a) const { return step(s, a).reward; }
  double reward(const State& s, ActionIndex a, const State&) const { return reward(s, a); }
  double logObservationDensity(Observation o, ActionIndex a, const State& next) const;
  double observationDistance(Observation a, Observation b) const { return a == b ? 0.0 : 1.0; }
  bool isTerminal(const State& s) const noexcept { return s.terminal; }

  /// Probability that sensing `rock` from the agent's cell is correct.
  double senseAccuracy(const State& s, int rock) const;

  int featureCount() const noexcept { return params_.rockCount; }
  int extraCount() const noexcept { return 2; }
  void features(const State& s, std::span<double> out) const;
  void extras(const State& s, std::span<double> out) const;

 private:
  RockSampleParams params_;
  std::vector<GridCell> rocks_;
  std::vector<int> rockIndex_;  // gridSize * gridSize, -1 when empty
};

}  // namespace betazero
