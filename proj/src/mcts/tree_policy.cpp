#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "betazero/mcts/search.hpp"

namespace betazero {

int argmaxLowest(const Eigen::Ref<const Eigen::VectorXd>& v) {
  int best = 0;
  for (int i = 1; i < v.size(); ++i)
    if (v[i] > v[best]) best = i;
  return best;
}

Eigen::VectorXd treePolicy(std::span<const double> q, std::span<const int> visits,
                           std::span<const char> present, double zQ, double zN,
                           double temperature) {
  const auto n = static_cast<Eigen::Index>(q.size());
  if (visits.size() != q.size() || present.size() != q.size())
    throw std::invalid_argument("treePolicy: size mismatch");
  Eigen::VectorXd pi = Eigen::VectorXd::Zero(n);
  int nPresent = 0;
  double maxQ = -std::numeric_limits<double>::infinity();
  long totalVisits = 0;
  for (Eigen::Index a = 0; a < n; ++a) {
    if (!present[a]) continue;
    ++nPresent;
    maxQ = std::max(maxQ, q[a]);
    totalVisits += visits[a];
  }
  if (nPresent == 0) throw std::invalid_argument("treePolicy: root has no child actions");

  if (zQ == 0.0 && zN == 0.0) {
    for (Eigen::Index a = 0; a < n; ++a)
      if (present[a]) pi[a] = 1.0 / nPresent;
    return pi;
  }

  // log of softmax(Q)^zQ (N / sum N)^zN, -inf for excluded actions
  double logZ = 0.0;
  for (Eigen::Index a = 0; a < n; ++a)
    if (present[a]) logZ += std::exp(q[a] - maxQ);
  logZ = std::log(logZ);
  Eigen::VectorXd logw = Eigen::VectorXd::Constant(n, -std::numeric_limits<double>::infinity());
  for (Eigen::Index a = 0; a < n; ++a) {
    if (!present[a]) continue;
    double lw = zQ * (q[a] - maxQ - logZ);
    if (zN != 0.0) {
      // An unvisited tree has no count information; counts then drop out.
      if (totalVisits > 0) {
        if (visits[a] == 0) continue;
        lw += zN * std::log(static_cast<double>(visits[a]) / static_cast<double>(totalVisits));
      }
    }
    logw[a] = lw;
  }

  if (temperature < 1e-6) {
    pi[argmaxLowest(logw)] = 1.0;
    return pi;
  }
  logw /= temperature;
  const double top = logw.maxCoeff();
  for (Eigen::Index a = 0; a < n; ++a)
    pi[a] = std::isinf(logw[a]) && logw[a] < 0 ? 0.0 : std::exp(logw[a] - top);
  pi /= pi.sum();
  return pi;
}

}  // namespace betazero
