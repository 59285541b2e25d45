#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "betazero/nnet/optimizer.hpp"
#include "betazero/nnet/policy_value_net.hpp"
#include "betazero/random.hpp"

namespace betazero {

/// One training triple: belief representation, tree policy, raw return.
struct Sample {
  Eigen::VectorXd representation;
  Eigen::VectorXd policy;
  double ret = 0.0;
};

struct TrainConfig {
  int epochs = 50;
  double learningRate = 1e-4;
  double l2 = 1e-5;
  int batchSize = 1024;
  ValueLoss valueLoss = ValueLoss::MSE;
  OptimizerKind optimizer = OptimizerKind::Adam;
  double trainFraction = 0.8;
  /// Size of the training set drawn with replacement from the data before
  /// the train/validation split is applied; 0 uses the data as is.
  int sampleCount = 100000;
};

struct TrainReport {
  LossBreakdown<double> firstEpoch;
  LossBreakdown<double> lastEpoch;
  LossBreakdown<double> validation;  // zero when there is no validation split
  int trainSamples = 0;
  int validationSamples = 0;
};

/// Packs samples into a batch, normalizing returns with the net's stats.
Batch<double> makeBatch(const PolicyValueNetd& net, const std::vector<const Sample*>& samples);

/// One optimizer step on `batch`. Returns the loss before the update.
/// Throws Divergence when the loss or any layer gradient is not finite.
LossBreakdown<double> trainStep(PolicyValueNetd& net, const Batch<double>& batch,
                                const TrainConfig& cfg, Optimizer<double>& optimizer, Rng& rng);

/// Splits the data into `trainFraction` train and held-out validation parts,
/// then trains for `cfg.epochs` epochs on trainFraction * sampleCount draws
/// (with replacement) from the train part. Validation is only scored. Every sample's return and
/// input are first folded into the net's running normalization statistics.
TrainReport trainNetwork(PolicyValueNetd& net, const std::vector<Sample>& data,
                         const TrainConfig& cfg, Rng& rng);

/// Loss in eval mode, no parameter change.
LossBreakdown<double> evaluateLoss(PolicyValueNetd& net, const std::vector<Sample>& data,
                                   const TrainConfig& cfg);

/// Text checkpoint with every float written as a hexfloat, so a save/load
/// round trip is bit-exact.
void saveCheckpoint(const PolicyValueNetd& net, const std::string& path);
PolicyValueNetd loadCheckpoint(const std::string& path);

}  // namespace betazero
