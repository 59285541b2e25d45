#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "betazero/nnet/running_stats.hpp"
#include "betazero/random.hpp"

namespace betazero {

/// Shape of the two-head network: a shared trunk of dense blocks, then a
/// value head and a policy head, each made of dense blocks followed by a
/// final affine layer. A dense block is fc -> [batch norm] -> relu -> dropout.
struct NetworkSpec {
  int inputDim = 2;
  int numActions = 3;
  std::vector<int> trunkWidths{64, 64, 64};
  std::vector<int> headWidths{64};
  bool batchNorm = false;
  double dropout = 0.0;
  double batchNormMomentum = 0.7;

  static NetworkSpec lightDark(int inputDim = 2, int numActions = 3);
  static NetworkSpec rockSample(int inputDim, int numActions);
};

inline NetworkSpec NetworkSpec::lightDark(int inputDim, int numActions) {
  NetworkSpec s;
  s.inputDim = inputDim;
  s.numActions = numActions;
  s.trunkWidths = {64, 64, 64};
  s.headWidths = {64};
  s.dropout = 0.2;
  return s;
}

inline NetworkSpec NetworkSpec::rockSample(int inputDim, int numActions) {
  NetworkSpec s;
  s.inputDim = inputDim;
  s.numActions = numActions;
  s.trunkWidths = {128, 128, 128};
  s.headWidths = {128};
  s.batchNorm = true;
  s.dropout = 0.5;
  return s;
}

enum class ValueLoss { MSE, MAE };

/// Raised when the loss or a layer gradient stops being finite.
class Divergence : public std::runtime_error {
 public:
  explicit Divergence(const std::string& layer)
      : std::runtime_error("divergence in layer " + layer), layer_(layer) {}
  const std::string& layer() const noexcept { return layer_; }

 private:
  std::string layer_;
};

template <typename Scalar>
struct LossBreakdown {
  Scalar total = 0;
  Scalar value = 0;
  Scalar policy = 0;
  Scalar l2 = 0;
};

/// Training batch, one sample per column. `inputs` are raw representations;
/// `targets` are normalized returns.
template <typename Scalar>
struct Batch {
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> inputs;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> policies;
  Eigen::Matrix<Scalar, 1, Eigen::Dynamic> targets;

  Eigen::Index size() const { return inputs.cols(); }
};

struct LossOptions {
  ValueLoss valueLoss = ValueLoss::MSE;
  double l2 = 0.0;
};

/// Two-head policy/value MLP. All trainable parameters live in one flat
/// vector; layers address it by offset.
template <typename Scalar>
class PolicyValueNet {
 public:
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using RowVector = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

  static constexpr Scalar kBatchNormEps = Scalar(1e-5);

  struct Layer {
    int in = 0;
    int out = 0;
    Eigen::Index weight = 0;
    Eigen::Index bias = 0;
    bool batchNorm = false;
    Eigen::Index gamma = -1;
    Eigen::Index beta = -1;
    int bnSlot = -1;
    bool relu = false;
    bool dropout = false;
    std::string name;
  };

  struct Output {
    Vector policy;
    Scalar value = 0;
    Scalar normalizedValue = 0;
  };

  PolicyValueNet() = default;

  /// He-uniform weights for relu layers; the final affine layer of each head
  /// starts at zero so the initial prior is uniform and the value is zero.
  PolicyValueNet(NetworkSpec spec, Rng& rng) : spec_(std::move(spec)) {
    build();
    initialize(rng);
  }

  /// Structure only, parameters zeroed (used when loading checkpoints).
  explicit PolicyValueNet(NetworkSpec spec) : spec_(std::move(spec)) { build(); }

  const NetworkSpec& spec() const noexcept { return spec_; }
  Vector& parameters() noexcept { return theta_; }
  const Vector& parameters() const noexcept { return theta_; }
  Eigen::Index parameterCount() const noexcept { return theta_.size(); }

  const std::vector<Layer>& trunk() const noexcept { return trunk_; }
  const std::vector<Layer>& valueHead() const noexcept { return valueHead_; }
  const std::vector<Layer>& policyHead() const noexcept { return policyHead_; }

  std::vector<Vector>& runningMeans() noexcept { return runMean_; }
  std::vector<Vector>& runningVars() noexcept { return runVar_; }
  const std::vector<Vector>& runningMeans() const noexcept { return runMean_; }
  const std::vector<Vector>& runningVars() const noexcept { return runVar_; }

  ReturnStats& returnStats() noexcept { return returnStats_; }
  const ReturnStats& returnStats() const noexcept { return returnStats_; }

  FeatureStats& inputStats() noexcept { return inputStats_; }
  const FeatureStats& inputStats() const noexcept { return inputStats_; }
  /// Recomputes the cached input standardization from inputStats().
  void refreshInputTransform() {
    inputCenter_ = inputStats_.center().template cast<Scalar>();
    inputScale_ = inputStats_.scale().template cast<Scalar>();
  }

  /// Eval-mode forward pass: dropout off, batch norm on running statistics.
  Output forward(const Eigen::Ref<const Eigen::VectorXd>& representation) const {
    if (representation.size() != spec_.inputDim)
      throw std::invalid_argument("PolicyValueNet: representation has size " +
                                  std::to_string(representation.size()) + ", expected " +
                                  std::to_string(spec_.inputDim));
    Vector x = ((representation.template cast<Scalar>() - inputCenter_).array() /
                inputScale_.array())
                   .matrix();
    for (const auto& l : trunk_) x = evalLayer(l, x);
    Vector v = x;
    for (const auto& l : valueHead_) v = evalLayer(l, v);
    Vector p = x;
    for (const auto& l : policyHead_) p = evalLayer(l, p);

    Output out;
    const Scalar maxLogit = p.maxCoeff();
    out.policy = (p.array() - maxLogit).exp().matrix();
    out.policy /= out.policy.sum();
    out.normalizedValue = v[0];
    out.value = static_cast<Scalar>(denormalize(static_cast<double>(v[0]), returnStats_));
    return out;
  }

  /// Batch forward plus loss, and optionally the gradient of the loss with
  /// respect to every parameter. In training mode batch norm uses batch
  /// statistics and dropout masks are drawn from `dropoutRng`.
  LossBreakdown<Scalar> lossAndGradient(const Batch<Scalar>& batch, const LossOptions& options,
                                        bool trainMode, Rng* dropoutRng, Vector* gradient,
                                        bool updateRunningStats = false) {
    const Eigen::Index m = batch.size();
    if (m == 0) throw std::invalid_argument("PolicyValueNet: empty batch");
    if (batch.inputs.rows() != spec_.inputDim)
      throw std::invalid_argument("PolicyValueNet: batch input dimension mismatch");

    Matrix x = ((batch.inputs.colwise() - inputCenter_).array().colwise() / inputScale_.array())
                   .matrix();
    std::vector<Cache> trunkCache(trunk_.size()), valueCache(valueHead_.size()),
        policyCache(policyHead_.size());
    const bool update = trainMode && updateRunningStats;
    Matrix h = forwardStack(trunk_, x, trainMode, dropoutRng, trunkCache, update);
    Matrix vbar = forwardStack(valueHead_, h, trainMode, dropoutRng, valueCache, update);
    Matrix logits = forwardStack(policyHead_, h, trainMode, dropoutRng, policyCache, update);

    // log-softmax per column
    const RowVector colMax = logits.colwise().maxCoeff();
    Matrix shifted = logits.rowwise() - colMax;
    const RowVector lse = shifted.array().exp().colwise().sum().log().matrix();
    const Matrix logp = shifted.rowwise() - lse;

    LossBreakdown<Scalar> loss;
    const Scalar invM = Scalar(1) / static_cast<Scalar>(m);
    loss.policy = -(batch.policies.cwiseProduct(logp)).sum() * invM;
    const RowVector err = vbar.row(0) - batch.targets;
    if (options.valueLoss == ValueLoss::MSE)
      loss.value = err.squaredNorm() * invM;
    else
      loss.value = err.cwiseAbs().sum() * invM;
    loss.l2 = static_cast<Scalar>(options.l2) * theta_.squaredNorm();
    loss.total = loss.value + loss.policy + loss.l2;

    if (gradient) {
      gradient->setZero(theta_.size());
      Matrix dLogits = (logp.array().exp().rowwise() * batch.policies.colwise().sum().array())
                           .matrix() -
                       batch.policies;
      dLogits *= invM;
      Matrix dV(1, m);
      if (options.valueLoss == ValueLoss::MSE)
        dV.row(0) = Scalar(2) * err * invM;
      else
        dV.row(0) = err.unaryExpr([](Scalar e) { return Scalar((e > 0) - (e < 0)); }) * invM;

      Matrix dH = backwardStack(policyHead_, policyCache, dLogits, *gradient);
      dH += backwardStack(valueHead_, valueCache, dV, *gradient);
      backwardStack(trunk_, trunkCache, dH, *gradient);
      *gradient += Scalar(2) * static_cast<Scalar>(options.l2) * theta_;
    }
    return loss;
  }

  /// Name of the first layer whose parameter gradient is not finite, or an
  /// empty string.
  std::string firstNonFiniteLayer(const Vector& gradient) const {
    for (const auto* stack : {&trunk_, &valueHead_, &policyHead_}) {
      for (const auto& l : *stack) {
        const Eigen::Index span = static_cast<Eigen::Index>(l.in) * l.out + l.out;
        if (!gradient.segment(l.weight, span).allFinite()) return l.name;
        if (l.batchNorm && !gradient.segment(l.gamma, 2 * l.out).allFinite()) return l.name;
      }
    }
    return {};
  }

 private:
  struct Cache {
    Matrix input;
    Matrix preActivation;
    Matrix xhat;
    Vector invStd;
    Matrix mask;
  };

  void build() {
    Eigen::Index offset = 0;
    int bnSlots = 0;
    auto addLayer = [&](std::vector<Layer>& stack, const std::string& name, int in, int out,
                        bool hidden) {
      Layer l;
      l.in = in;
      l.out = out;
      l.weight = offset;
      offset += static_cast<Eigen::Index>(in) * out;
      l.bias = offset;
      offset += out;
      l.relu = hidden;
      l.dropout = hidden && spec_.dropout > 0.0;
      if (hidden && spec_.batchNorm) {
        l.batchNorm = true;
        l.gamma = offset;
        offset += out;
        l.beta = offset;
        offset += out;
        l.bnSlot = bnSlots++;
      }
      l.name = name;
      stack.push_back(l);
    };

    int width = spec_.inputDim;
    for (std::size_t i = 0; i < spec_.trunkWidths.size(); ++i) {
      addLayer(trunk_, "trunk." + std::to_string(i), width, spec_.trunkWidths[i], true);
      width = spec_.trunkWidths[i];
    }
    const int trunkOut = width;
    for (std::size_t i = 0; i < spec_.headWidths.size(); ++i) {
      addLayer(valueHead_, "value." + std::to_string(i), width, spec_.headWidths[i], true);
      width = spec_.headWidths[i];
    }
    addLayer(valueHead_, "value.out", width, 1, false);
    width = trunkOut;
    for (std::size_t i = 0; i < spec_.headWidths.size(); ++i) {
      addLayer(policyHead_, "policy." + std::to_string(i), width, spec_.headWidths[i], true);
      width = spec_.headWidths[i];
    }
    addLayer(policyHead_, "policy.out", width, spec_.numActions, false);

    theta_ = Vector::Zero(offset);
    runMean_.clear();
    runVar_.clear();
    for (const auto* stack : {&trunk_, &valueHead_, &policyHead_})
      for (const auto& l : *stack)
        if (l.batchNorm) {
          runMean_.push_back(Vector::Zero(l.out));
          runVar_.push_back(Vector::Ones(l.out));
        }
    inputStats_ = FeatureStats(spec_.inputDim);
    refreshInputTransform();
  }

  void initialize(Rng& rng) {
    theta_.setZero();
    for (const auto* stack : {&trunk_, &valueHead_, &policyHead_}) {
      for (const auto& l : *stack) {
        if (l.relu) {
          const double limit = std::sqrt(6.0 / l.in);
          for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(l.in) * l.out; ++i)
            theta_[l.weight + i] = static_cast<Scalar>((2.0 * uniform01(rng) - 1.0) * limit);
        }
        if (l.batchNorm) theta_.segment(l.gamma, l.out).setOnes();
      }
    }
  }

  Eigen::Map<const Matrix> weights(const Layer& l) const {
    return {theta_.data() + l.weight, l.out, l.in};
  }
  Eigen::Map<const Vector> segment(Eigen::Index offset, int n) const {
    return {theta_.data() + offset, n};
  }

  Vector evalLayer(const Layer& l, const Vector& x) const {
    Vector z = weights(l) * x + segment(l.bias, l.out);
    if (l.batchNorm) {
      const Vector& mu = runMean_[l.bnSlot];
      const Vector& var = runVar_[l.bnSlot];
      z = ((z - mu).array() / (var.array() + kBatchNormEps).sqrt() *
               segment(l.gamma, l.out).array() +
           segment(l.beta, l.out).array())
              .matrix();
    }
    if (l.relu) z = z.cwiseMax(Scalar(0));
    return z;
  }

  Matrix forwardStack(const std::vector<Layer>& stack, Matrix x, bool train, Rng* rng,
                      std::vector<Cache>& caches, bool updateRunning) {
    for (std::size_t i = 0; i < stack.size(); ++i) {
      const Layer& l = stack[i];
      Cache& c = caches[i];
      c.input = std::move(x);
      Matrix z = weights(l) * c.input;
      z.colwise() += segment(l.bias, l.out);
      if (l.batchNorm) {
        const auto m = static_cast<Scalar>(z.cols());
        if (train) {
          const Vector mu = z.rowwise().mean();
          const Matrix centered = z.colwise() - mu;
          const Vector var = centered.array().square().rowwise().sum().matrix() / m;
          c.invStd = (var.array() + kBatchNormEps).rsqrt().matrix();
          c.xhat = (centered.array().colwise() * c.invStd.array()).matrix();
          if (updateRunning) {
            const auto mom = static_cast<Scalar>(spec_.batchNormMomentum);
            const Scalar unbias = m > 1 ? m / (m - 1) : Scalar(1);
            runMean_[l.bnSlot] = (Scalar(1) - mom) * runMean_[l.bnSlot] + mom * mu;
            runVar_[l.bnSlot] = (Scalar(1) - mom) * runVar_[l.bnSlot] + mom * unbias * var;
          }
        } else {
          c.invStd = (runVar_[l.bnSlot].array() + kBatchNormEps).rsqrt().matrix();
          c.xhat = ((z.colwise() - runMean_[l.bnSlot]).array().colwise() * c.invStd.array())
                       .matrix();
        }
        z = ((c.xhat.array().colwise() * segment(l.gamma, l.out).array()).colwise() +
             segment(l.beta, l.out).array())
                .matrix();
      }
      c.preActivation = z;
      if (l.relu) z = z.cwiseMax(Scalar(0));
      if (l.dropout && train && rng != nullptr) {
        const double keep = 1.0 - spec_.dropout;
        const auto scale = static_cast<Scalar>(1.0 / keep);
        c.mask.resize(z.rows(), z.cols());
        for (Eigen::Index k = 0; k < c.mask.size(); ++k)
          c.mask.data()[k] = uniform01(*rng) < keep ? scale : Scalar(0);
        z = z.cwiseProduct(c.mask);
      } else {
        c.mask.resize(0, 0);
      }
      x = std::move(z);
    }
    return x;
  }

  Matrix backwardStack(const std::vector<Layer>& stack, const std::vector<Cache>& caches,
                       Matrix d, Vector& grad) const {
    for (std::size_t i = stack.size(); i-- > 0;) {
      const Layer& l = stack[i];
      const Cache& c = caches[i];
      if (c.mask.size() > 0) d = d.cwiseProduct(c.mask);
      if (l.relu) d = (c.preActivation.array() > Scalar(0)).select(d, Scalar(0));
      if (l.batchNorm) {
        const auto m = static_cast<Scalar>(d.cols());
        grad.segment(l.gamma, l.out) += d.cwiseProduct(c.xhat).rowwise().sum();
        grad.segment(l.beta, l.out) += d.rowwise().sum();
        const Matrix dxhat = (d.array().colwise() * segment(l.gamma, l.out).array()).matrix();
        const Vector sumD = dxhat.rowwise().sum();
        const Vector sumDX = dxhat.cwiseProduct(c.xhat).rowwise().sum();
        d = (((m * dxhat).colwise() - sumD) - (c.xhat.array().colwise() * sumDX.array()).matrix())
                .array()
                .colwise() *
            (c.invStd.array() / m);
      }
      Eigen::Map<Matrix> dW(grad.data() + l.weight, l.out, l.in);
      dW.noalias() += d * c.input.transpose();
      grad.segment(l.bias, l.out) += d.rowwise().sum();
      d = weights(l).transpose() * d;
    }
    return d;
  }

  NetworkSpec spec_;
  Vector theta_;
  std::vector<Layer> trunk_, valueHead_, policyHead_;
  std::vector<Vector> runMean_, runVar_;
  ReturnStats returnStats_;
  FeatureStats inputStats_;
  Vector inputCenter_, inputScale_;
};

using PolicyValueNetd = PolicyValueNet<double>;

}  // namespace betazero
