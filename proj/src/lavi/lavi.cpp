#include "betazero/lavi/lavi.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "betazero/parallel.hpp"

namespace betazero {

double BeliefGrid::interpolate(double mean, double std) const {
  auto locate = [&](double x, double lo, double hi, int& i, double& t) {
    const double u = std::clamp((x - lo) / (hi - lo), 0.0, 1.0) * (points - 1);
    i = std::min(static_cast<int>(u), points - 2);
    t = u - i;
  };
  int i, j;
  double tx, ty;
  locate(mean, meanLo, meanHi, i, tx);
  locate(std, stdLo, stdHi, j, ty);
  return (1 - tx) * (1 - ty) * values(i, j) + tx * (1 - ty) * values(i + 1, j) +
         (1 - tx) * ty * values(i, j + 1) + tx * ty * values(i + 1, j + 1);
}

ParticleBelief<LightDarkState> gaussianBelief(double mean, double std, int n, Rng& rng) {
  std::vector<LightDarkState> ps(n);
  for (auto& p : ps) p.y = mean + std * standardNormal(rng);
  return ParticleBelief<LightDarkState>(std::move(ps));
}

Eigen::Vector3d laviLookahead(const LightDark& problem, const ParticleBelief<LightDarkState>& b,
                              const BeliefGrid& grid, int samples, Rng& rng) {
  const auto n = static_cast<int>(b.size());
  Eigen::Vector3d q;
  std::vector<double> logw(n);
  for (ActionIndex a = 0; a < 3; ++a) {
    q[a] = beliefReward(problem, b, a, rng);
    if (a == LightDark::kStop) continue;  // stopping always terminates
    const double shift = LightDark::displacement(a);
    double future = 0.0;
    for (int k = 0; k < samples; ++k) {
      const double yTrue = b.particles[uniformIndex(rng, n)].y + shift;
      const double o = problem.sampleObservation(a, {yTrue, false}, rng);
      double top = -std::numeric_limits<double>::infinity();
      for (int i = 0; i < n; ++i) {
        logw[i] = problem.logObservationDensity(o, a, {b.particles[i].y + shift, false});
        top = std::max(top, logw[i]);
      }
      double wsum = 0.0, m1 = 0.0;
      for (int i = 0; i < n; ++i) {
        logw[i] = std::exp(logw[i] - top);
        wsum += logw[i];
        m1 += logw[i] * (b.particles[i].y + shift);
      }
      const double mean = m1 / wsum;
      double m2 = 0.0;
      for (int i = 0; i < n; ++i) {
        const double d = b.particles[i].y + shift - mean;
        m2 += logw[i] * d * d;
      }
      const double var = n > 1 ? m2 / wsum * n / (n - 1.0) : 0.0;
      future += grid.interpolate(mean, std::sqrt(var));
    }
    q[a] += problem.discount() * future / samples;
  }
  return q;
}

LaviSolution solveLavi(const LightDark& problem, const LaviConfig& cfg, BeliefGrid grid) {
  const int g = grid.points;
  grid.values = Eigen::MatrixXd::Zero(g, g);
  LaviSolution sol;
  sol.policy = Eigen::MatrixXi::Zero(g, g);
  for (int sweep = 0; sweep < cfg.maxSweeps; ++sweep) {
    Eigen::MatrixXd next(g, g);
    parallelFor(g * g, cfg.workers, [&](int idx) {
      const int i = idx / g, j = idx % g;
      Rng rng(deriveSeed(cfg.seed, sweep, idx));
      const auto b = gaussianBelief(grid.meanAt(i), grid.stdAt(j), cfg.reconstructionParticles, rng);
      const Eigen::Vector3d q = laviLookahead(problem, b, grid, cfg.samplesPerBelief, rng);
      Eigen::Index best;
      next(i, j) = q.maxCoeff(&best);
      sol.policy(i, j) = static_cast<int>(best);
    });
    const double residual = (next - grid.values).cwiseAbs().maxCoeff();
    grid.values = next;
    sol.residuals.push_back(residual);
    if (residual < cfg.tolerance) break;
  }
  sol.grid = grid;
  return sol;
}

EvalResult evaluateLavi(const LightDark& problem, const BeliefGrid& grid, int nSeeds,
                        std::uint64_t masterSeed, int samplesPerAction, int workers,
                        const EpisodeOptions& episode) {
  const std::function<ActionIndex(const ParticleBelief<LightDarkState>&, std::uint64_t)> policy =
      [&](const ParticleBelief<LightDarkState>& b, std::uint64_t stepSeed) {
        Rng rng(stepSeed);
        Eigen::Index best;
        laviLookahead(problem, b, grid, samplesPerAction, rng).maxCoeff(&best);
        return static_cast<ActionIndex>(best);
      };
  return evaluateSelector(problem, policy, nSeeds, masterSeed, workers, episode);
}

void writeLaviGridCsv(std::ostream& out, const LaviSolution& solution) {
  out << "# lavi_grid v1\nmean,std,value,bestAction\n";
  const auto& g = solution.grid;
  for (int i = 0; i < g.points; ++i)
    for (int j = 0; j < g.points; ++j)
      out << g.meanAt(i) << ',' << g.stdAt(j) << ',' << g.values(i, j) << ','
          << solution.policy(i, j) << '\n';
}

}  // namespace betazero
