#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "betazero/pomdp.hpp"
#include "betazero/random.hpp"

namespace betazero {

/// Unweighted-after-resampling particle approximation of a belief.
template <class State>
struct ParticleBelief {
  std::vector<State> particles;
  std::vector<double> weights;

  ParticleBelief() = default;
  explicit ParticleBelief(std::vector<State> ps)
      : particles(std::move(ps)),
        weights(particles.size(), particles.empty() ? 0.0 : 1.0 / particles.size()) {}

  std::size_t size() const noexcept { return particles.size(); }
  bool empty() const noexcept { return particles.empty(); }
};

/// Which summary statistics make up the network input.
enum class RepresentationMode { MeanStd, MeanOnly };

struct UpdateOptions {
  /// Weight particles with a Gaussian kernel on simulated-vs-actual
  /// observation distance instead of the observation density.
  bool abc = false;
  double abcSigma = 0.1;
};

/// Systematic resampling: one offset u ~ U[0, 1/n) and stride 1/n.
/// `weights` must be normalized.
template <class T>
std::vector<T> lowVarianceResample(std::span<const T> particles, std::span<const double> weights,
                                   Rng& rng) {
  const std::size_t n = particles.size();
  std::vector<T> out;
  out.reserve(n);
  if (n == 0) return out;
  const double step = 1.0 / static_cast<double>(n);
  const double u = uniform01(rng) * step;
  std::size_t i = 0;
  double cumulative = weights[0];
  for (std::size_t m = 0; m < n; ++m) {
    const double target = u + static_cast<double>(m) * step;
    while (target >= cumulative && i + 1 < n) {
      ++i;
      cumulative += weights[i];
    }
    out.push_back(particles[i]);
  }
  return out;
}

template <GenerativePomdp P>
ParticleBelief<typename P::State> sampleInitialBelief(const P& problem, int nParticles, Rng& rng) {
  std::vector<typename P::State> ps;
  ps.reserve(nParticles);
  for (int i = 0; i < nParticles; ++i) ps.push_back(problem.sampleInitialState(rng));
  return ParticleBelief<typename P::State>(std::move(ps));
}

/// Bootstrap particle filter step: propagate, reweight, resample.
///
/// Weights come from the observation density. When every raw weight
/// underflows to zero the update is retried once with tempered weights
/// density^0.5, evaluated in log space relative to the best particle.
/// If no particle has a finite log-density the update throws
/// ParticleDepletion.
template <GenerativePomdp P>
ParticleBelief<typename P::State> updateBelief(const P& problem,
                                               const ParticleBelief<typename P::State>& belief,
                                               ActionIndex action,
                                               const typename P::Observation& observation,
                                               Rng& rng, const UpdateOptions& options = {}) {
  using State = typename P::State;
  const std::size_t n = belief.size();
  if (n == 0) throw std::invalid_argument("updateBelief: degenerate belief");

  std::vector<State> propagated(n);
  std::vector<double> logWeights(n);
  for (std::size_t i = 0; i < n; ++i) {
    propagated[i] = problem.sampleTransition(belief.particles[i], action, rng);
    if (options.abc) {
      if constexpr (requires { problem.observationDistance(observation, observation); }) {
        const auto simulated = problem.sampleObservation(action, propagated[i], rng);
        const double d = problem.observationDistance(simulated, observation) / options.abcSigma;
        logWeights[i] = -0.5 * d * d;
      } else {
        throw std::logic_error("updateBelief: ABC reweighting needs observationDistance");
      }
    } else {
      logWeights[i] = problem.logObservationDensity(observation, action, propagated[i]);
    }
  }

  std::vector<double> weights(n);
  double total = 0.0;
  double maxLog = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    weights[i] = std::exp(logWeights[i]);
    total += weights[i];
    maxLog = std::max(maxLog, logWeights[i]);
  }
  if (!(total > 0.0) || !std::isfinite(total)) {
    if (!std::isfinite(maxLog)) throw ParticleDepletion(std::exp(maxLog));
    total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      weights[i] = std::exp(0.5 * (logWeights[i] - maxLog));
      total += weights[i];
    }
  }
  for (double& w : weights) w /= total;

  return ParticleBelief<State>(lowVarianceResample<State>(propagated, weights, rng));
}

/// Length of the representation vector for `mode`.
template <GenerativePomdp P>
int representationSize(const P& problem, RepresentationMode mode) {
  const int d = problem.featureCount();
  return (mode == RepresentationMode::MeanStd ? 2 * d : d) + problem.extraCount();
}

/// Summary statistics phi(b) = [mean, std, extras]. The std uses the n-1
/// divisor. Means are accumulated relative to the first particle so a
/// point-mass belief reproduces the particle exactly with zero std.
template <GenerativePomdp P>
Eigen::VectorXd represent(const P& problem, const ParticleBelief<typename P::State>& belief,
                          RepresentationMode mode = RepresentationMode::MeanStd) {
  const std::size_t n = belief.size();
  if (n < 2) throw std::invalid_argument("represent: need at least two particles");
  const int d = problem.featureCount();
  const int e = problem.extraCount();

  Eigen::MatrixXd feats(d, static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i)
    problem.features(belief.particles[i], std::span<double>(feats.col(i).data(), d));

  const Eigen::VectorXd shift = feats.col(0);
  const Eigen::VectorXd mean =
      shift + (feats.colwise() - shift).rowwise().sum() / static_cast<double>(n);
  const Eigen::VectorXd stdev =
      ((feats.colwise() - mean).array().square().rowwise().sum() / static_cast<double>(n - 1))
          .sqrt()
          .matrix();

  Eigen::VectorXd out(representationSize(problem, mode));
  out.head(d) = mean;
  int offset = d;
  if (mode == RepresentationMode::MeanStd) {
    out.segment(d, d) = stdev;
    offset += d;
  }
  if (e > 0) problem.extras(belief.particles.front(), std::span<double>(out.data() + offset, e));
  return out;
}

}  // namespace betazero
