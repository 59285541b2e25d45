#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

namespace betazero {

/// Welford accumulator over every value seen so far. `stddev` is the
/// population standard deviation, floored so normalization never divides by
/// zero. An empty accumulator behaves as the identity transform.
struct ReturnStats {
  static constexpr double kStdFloor = 1e-6;

  std::uint64_t count = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double g) {
    ++count;
    const double delta = g - mean;
    mean += delta / static_cast<double>(count);
    m2 += delta * (g - mean);
  }
  void add(std::span<const double> gs) {
    for (double g : gs) add(g);
  }

  double center() const { return count == 0 ? 0.0 : mean; }
  double stddev() const {
    if (count == 0) return 1.0;
    return std::max(std::sqrt(m2 / static_cast<double>(count)), kStdFloor);
  }
};

inline std::vector<double> normalizeReturns(std::span<const double> returns,
                                            const ReturnStats& stats) {
  std::vector<double> out(returns.size());
  const double mu = stats.center();
  const double sd = stats.stddev();
  std::transform(returns.begin(), returns.end(), out.begin(),
                 [&](double g) { return (g - mu) / sd; });
  return out;
}

inline double normalizeReturn(double g, const ReturnStats& stats) {
  return (g - stats.center()) / stats.stddev();
}

inline double denormalize(double normalized, const ReturnStats& stats) {
  return normalized * stats.stddev() + stats.center();
}

/// Per-feature running moments for input standardization.
struct FeatureStats {
  std::uint64_t count = 0;
  Eigen::VectorXd mean;
  Eigen::VectorXd m2;

  explicit FeatureStats(Eigen::Index dim = 0)
      : mean(Eigen::VectorXd::Zero(dim)), m2(Eigen::VectorXd::Zero(dim)) {}

  void add(const Eigen::Ref<const Eigen::VectorXd>& x) {
    ++count;
    const Eigen::VectorXd delta = x - mean;
    mean += delta / static_cast<double>(count);
    m2 += delta.cwiseProduct(x - mean);
  }

  Eigen::VectorXd center() const {
    return count == 0 ? Eigen::VectorXd::Zero(mean.size()) : mean;
  }
  /// Features with (near) zero spread are passed through unscaled.
  Eigen::VectorXd scale() const {
    Eigen::VectorXd s = Eigen::VectorXd::Ones(mean.size());
    if (count == 0) return s;
    for (Eigen::Index i = 0; i < s.size(); ++i) {
      const double sd = std::sqrt(m2[i] / static_cast<double>(count));
      if (sd > 1e-6) s[i] = sd;
    }
    return s;
  }
};

}  // namespace betazero
