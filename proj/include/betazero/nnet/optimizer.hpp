#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>

namespace betazero {

enum class OptimizerKind { Adam, RMSProp };

inline OptimizerKind parseOptimizer(const std::string& name) {
  if (name == "adam") return OptimizerKind::Adam;
  if (name == "rmsprop") return OptimizerKind::RMSProp;
  throw std::invalid_argument("unknown optimizer '" + name + "'");
}

/// First-order optimizer over a flat parameter vector.
template <typename Scalar>
class Optimizer {
 public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  virtual ~Optimizer() = default;
  virtual void step(Vector& theta, const Vector& gradient) = 0;
};

template <typename Scalar>
class Adam final : public Optimizer<Scalar> {
 public:
  using Vector = typename Optimizer<Scalar>::Vector;

  explicit Adam(Scalar lr, Scalar beta1 = Scalar(0.9), Scalar beta2 = Scalar(0.999),
                Scalar eps = Scalar(1e-8))
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

  void step(Vector& theta, const Vector& g) override {
    if (m_.size() != theta.size()) {
      m_ = Vector::Zero(theta.size());
      v_ = Vector::Zero(theta.size());
    }
    ++t_;
    m_ = beta1_ * m_ + (Scalar(1) - beta1_) * g;
    v_ = beta2_ * v_ + (Scalar(1) - beta2_) * g.cwiseAbs2();
    const Scalar c1 = Scalar(1) - std::pow(beta1_, static_cast<Scalar>(t_));
    const Scalar c2 = Scalar(1) - std::pow(beta2_, static_cast<Scalar>(t_));
    theta.array() -= lr_ * (m_.array() / c1) / ((v_.array() / c2).sqrt() + eps_);
  }

 private:
  Scalar lr_, beta1_, beta2_, eps_;
  Vector m_, v_;
  long t_ = 0;
};

template <typename Scalar>
class RMSProp final : public Optimizer<Scalar> {
 public:
  using Vector = typename Optimizer<Scalar>::Vector;

  explicit RMSProp(Scalar lr, Scalar rho = Scalar(0.9), Scalar eps = Scalar(1e-8))
      : lr_(lr), rho_(rho), eps_(eps) {}

  void step(Vector& theta, const Vector& g) override {
    if (acc_.size() != theta.size()) acc_ = Vector::Zero(theta.size());
    acc_ = rho_ * acc_ + (Scalar(1) - rho_) * g.cwiseAbs2();
    theta.array() -= lr_ * g.array() / (acc_.array().sqrt() + eps_);
  }

 private:
  Scalar lr_, rho_, eps_;
  Vector acc_;
};

template <typename Scalar>
std::unique_ptr<Optimizer<Scalar>> makeOptimizer(OptimizerKind kind, double lr) {
  if (kind == OptimizerKind::Adam) return std::make_unique<Adam<Scalar>>(static_cast<Scalar>(lr));
  return std::make_unique<RMSProp<Scalar>>(static_cast<Scalar>(lr));
}

}  // namespace betazero
