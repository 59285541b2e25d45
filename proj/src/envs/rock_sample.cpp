#include "betazero/envs/rock_sample.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace betazero {

double rockSenseProbability(GridCell agent, GridCell rock, double efficiency) {
  const double d = std::hypot(static_cast<double>(agent.x - rock.x),
                              static_cast<double>(agent.y - rock.y));
  return 0.5 * (1.0 + std::exp(-d * std::numbers::ln2 / efficiency));
}

namespace {

std::vector<GridCell> placeRocks(const RockSampleParams& p) {
  if (p.rockCount > p.gridSize * p.gridSize)
    throw std::invalid_argument("RockSample: more rocks than grid cells");
  std::vector<int> cells(p.gridSize * p.gridSize);
  for (int i = 0; i < static_cast<int>(cells.size()); ++i) cells[i] = i;
  Rng rng(p.layoutSeed);
  // Partial Fisher-Yates for the first k cells.
  for (int i = 0; i < p.rockCount; ++i) {
    const int j = i + uniformIndex(rng, static_cast<int>(cells.size()) - i);
    std::swap(cells[i], cells[j]);
  }
  std::vector<GridCell> rocks;
  for (int i = 0; i < p.rockCount; ++i) rocks.push_back({cells[i] % p.gridSize, cells[i] / p.gridSize});
  return rocks;
}

}  // namespace

RockSample::RockSample(RockSampleParams params) : RockSample(params, placeRocks(params)) {}

RockSample::RockSample(RockSampleParams params, std::vector<GridCell> rocks)
    : params_(params), rocks_(std::move(rocks)) {
  if (params_.gridSize <= 0) throw std::invalid_argument("RockSample: grid size must be positive");
  if (params_.rockCount < 0 || params_.rockCount > 32)
    throw std::invalid_argument("RockSample: rock count must lie in [0, 32]");
  if (static_cast<int>(rocks_.size()) != params_.rockCount)
    throw std::invalid_argument("RockSample: rock list does not match rock count");
  if (!(params_.discount >= 0.0 && params_.discount < 1.0))
    throw std::invalid_argument("RockSample: discount must lie in [0, 1)");
  rockIndex_.assign(params_.gridSize * params_.gridSize, -1);
  for (int i = 0; i < params_.rockCount; ++i) {
    const auto& r = rocks_[i];
    if (r.x < 0 || r.y < 0 || r.x >= params_.gridSize || r.y >= params_.gridSize)
      throw std::invalid_argument("RockSample: rock outside grid");
    int& slot = rockIndex_[r.y * params_.gridSize + r.x];
    if (slot != -1) throw std::invalid_argument("RockSample: rock positions must be distinct");
    slot = i;
  }
}

std::uint64_t RockSample::stateSpaceSize() const noexcept {
  const auto cells = static_cast<std::uint64_t>(params_.gridSize) * params_.gridSize;
  return cells << params_.rockCount;
}

int RockSample::rockAt(int x, int y) const noexcept {
  if (x < 0 || y < 0 || x >= params_.gridSize || y >= params_.gridSize) return -1;
  return rockIndex_[y * params_.gridSize + x];
}

RockSample::StepResult RockSample::step(const State& s, ActionIndex a) const {
  if (a < 0 || a >= numActions()) throw std::out_of_range("RockSample: invalid action");
  StepResult out{s, 0.0, s.terminal};
  if (s.terminal) return out;
  const int n = params_.gridSize;
  switch (a) {
    case kNorth:
      out.next.y = static_cast<std::int16_t>(std::min(s.y + 1, n - 1));
      break;
    case kSouth:
      out.next.y = static_cast<std::int16_t>(std::max(s.y - 1, 0));
      break;
    case kEast:
      if (s.x + 1 >= n) {
        out.next.terminal = true;
        out.terminal = true;
        out.reward = params_.exitReward;
      } else {
        out.next.x = static_cast<std::int16_t>(s.x + 1);
      }
      break;
    case kWest:
      out.next.x = static_cast<std::int16_t>(std::max(s.x - 1, 0));
      break;
    case kSample: {
      const int rock = rockAt(s.x, s.y);
      if (rock >= 0 && s.good(rock)) {
        out.reward = params_.goodSampleReward;
        out.next.goodRocks &= ~(1U << rock);
      } else {
        out.reward = params_.badSampleReward;
      }
      break;
    }
    default:
      break;  // sensing leaves the state unchanged
  }
  return out;
}

RockSample::State RockSample::sampleInitialState(Rng& rng) const {
  State s;
  s.x = static_cast<std::int16_t>(start().x);
  s.y = static_cast<std::int16_t>(start().y);
  for (int i = 0; i < params_.rockCount; ++i)
    if (uniform01(rng) < 0.5) s.goodRocks |= (1U << i);
  return s;
}

double RockSample::senseAccuracy(const State& s, int rock) const {
  return rockSenseProbability({s.x, s.y}, rocks_.at(rock), params_.sensorEfficiency);
}

RockSample::Observation RockSample::sampleObservation(ActionIndex a, const State& next,
                                                      Rng& rng) const {
  if (a < kFirstSense) return RockObservation::None;
  const int rock = a - kFirstSense;
  const bool truth = next.good(rock);
  const bool correct = uniform01(rng) < senseAccuracy(next, rock);
  return (truth == correct) ? RockObservation::Good : RockObservation::Bad;
}

double RockSample::logObservationDensity(Observation o, ActionIndex a, const State& next) const {
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  if (a < kFirstSense) return o == RockObservation::None ? 0.0 : kNegInf;
  if (o == RockObservation::None) return kNegInf;
  const int rock = a - kFirstSense;
  const double p = senseAccuracy(next, rock);
  const bool reportsGood = o == RockObservation::Good;
  const double prob = (reportsGood == next.good(rock)) ? p : 1.0 - p;
  return prob > 0.0 ? std::log(prob) : kNegInf;
}

void RockSample::features(const State& s, std::span<double> out) const {
  for (int i = 0; i < params_.rockCount; ++i) out[i] = s.good(i) ? 1.0 : 0.0;
}

void RockSample::extras(const State& s, std::span<double> out) const {
  out[0] = s.x;
  out[1] = s.y;
}

}  // namespace betazero
