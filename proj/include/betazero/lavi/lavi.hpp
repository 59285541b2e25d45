#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <ostream>
#include <vector>

#include "betazero/belief.hpp"
#include "betazero/envs/light_dark.hpp"
#include "betazero/selfplay/selfplay.hpp"

namespace betazero {

/// Uniform grid over the LightDark (mean, std) belief summary with bilinear
/// interpolation. Queries outside the grid are clamped to its boundary.
struct BeliefGrid {
  double meanLo = -3.0;
  double meanHi = 12.0;
  double stdLo = 0.0;
  double stdHi = 5.0;
  int points = 25;
  Eigen::MatrixXd values;  // (mean index, std index)

  BeliefGrid() : values(Eigen::MatrixXd::Zero(points, points)) {}

  double meanAt(int i) const { return meanLo + (meanHi - meanLo) * i / (points - 1); }
  double stdAt(int j) const { return stdLo + (stdHi - stdLo) * j / (points - 1); }
  double interpolate(double mean, double std) const;
};

struct LaviConfig {
  int samplesPerBelief = 100;
  int maxSweeps = 25;
  double tolerance = 1e-3;
  int reconstructionParticles = 500;
  std::uint64_t seed = 0;
  int workers = 1;
};

struct LaviSolution {
  BeliefGrid grid;
  Eigen::MatrixXi policy;            // greedy action per grid point
  std::vector<double> residuals;  // max |V_new - V_old| per sweep
};

/// Monte Carlo lookahead Q(b, a) = R_b(b, a) + gamma E[V(phi(b'))] from
/// `samples` generative draws (s ~ b, s', o). The successor summary phi(b')
/// is the importance-weighted mean and Bessel-corrected std of the
/// propagated particles, the expectation of what resampling would give.
Eigen::Vector3d laviLookahead(const LightDark& problem, const ParticleBelief<LightDarkState>& b,
                              const BeliefGrid& grid, int samples, Rng& rng);

/// n particles y ~ N(mean, std^2).
ParticleBelief<LightDarkState> gaussianBelief(double mean, double std, int n, Rng& rng);

LaviSolution solveLavi(const LightDark& problem, const LaviConfig& cfg, BeliefGrid grid = {});

/// Greedy episodes that re-estimate Q with fresh lookahead samples at
/// every step.
EvalResult evaluateLavi(const LightDark& problem, const BeliefGrid& grid, int nSeeds,
                        std::uint64_t masterSeed, int samplesPerAction = 100, int workers = 1,
                        const EpisodeOptions& episode = {});

/// Rows of mean, std, value, best action.
void writeLaviGridCsv(std::ostream& out, const LaviSolution& solution);

}  // namespace betazero
