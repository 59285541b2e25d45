#include "betazero/nnet/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace betazero {

Batch<double> makeBatch(const PolicyValueNetd& net, const std::vector<const Sample*>& samples) {
  const auto m = static_cast<Eigen::Index>(samples.size());
  Batch<double> b;
  b.inputs.resize(net.spec().inputDim, m);
  b.policies.resize(net.spec().numActions, m);
  b.targets.resize(m);
  for (Eigen::Index j = 0; j < m; ++j) {
    b.inputs.col(j) = samples[j]->representation;
    b.policies.col(j) = samples[j]->policy;
    b.targets[j] = normalizeReturn(samples[j]->ret, net.returnStats());
  }
  return b;
}

LossBreakdown<double> trainStep(PolicyValueNetd& net, const Batch<double>& batch,
                                const TrainConfig& cfg, Optimizer<double>& optimizer, Rng& rng) {
  Eigen::VectorXd grad;
  const LossOptions opts{cfg.valueLoss, cfg.l2};
  const auto loss = net.lossAndGradient(batch, opts, true, &rng, &grad, true);
  if (!std::isfinite(loss.total)) throw Divergence("loss");
  if (const auto layer = net.firstNonFiniteLayer(grad); !layer.empty()) throw Divergence(layer);
  optimizer.step(net.parameters(), grad);
  return loss;
}

namespace {

void accumulate(LossBreakdown<double>& acc, const LossBreakdown<double>& l, double w) {
  acc.total += w * l.total;
  acc.value += w * l.value;
  acc.policy += w * l.policy;
  acc.l2 += w * l.l2;
}

}  // namespace

LossBreakdown<double> evaluateLoss(PolicyValueNetd& net, const std::vector<Sample>& data,
                                   const TrainConfig& cfg) {
  LossBreakdown<double> out;
  if (data.empty()) return out;
  std::vector<const Sample*> ptrs;
  for (const auto& s : data) ptrs.push_back(&s);
  const auto batch = makeBatch(net, ptrs);
  return net.lossAndGradient(batch, {cfg.valueLoss, cfg.l2}, false, nullptr, nullptr);
}

TrainReport trainNetwork(PolicyValueNetd& net, const std::vector<Sample>& data,
                         const TrainConfig& cfg, Rng& rng) {
  if (cfg.epochs < 0) throw std::invalid_argument("train: epochs must be nonnegative");
  if (!(cfg.trainFraction > 0.0 && cfg.trainFraction <= 1.0))
    throw std::invalid_argument("train: trainFraction must lie in (0, 1]");
  if (cfg.batchSize < 1) throw std::invalid_argument("train: batch size must be positive");

  TrainReport report;
  if (data.empty()) return report;

  for (const auto& s : data) {
    net.returnStats().add(s.ret);
    net.inputStats().add(s.representation);
  }
  net.refreshInputTransform();

  std::vector<int> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  auto nTrain = static_cast<std::size_t>(std::ceil(cfg.trainFraction * data.size()));
  nTrain = std::clamp<std::size_t>(nTrain, 1, data.size());
  std::vector<int> trainIdx(order.begin(), order.begin() + nTrain);
  std::vector<Sample> validation;
  for (std::size_t i = nTrain; i < order.size(); ++i) validation.push_back(data[order[i]]);
  if (cfg.sampleCount > 0) {
    const auto draws = static_cast<std::size_t>(
        std::max(1.0, std::round(cfg.trainFraction * cfg.sampleCount)));
    std::vector<int> drawn(draws);
    for (auto& d : drawn) d = trainIdx[uniformIndex(rng, static_cast<int>(nTrain))];
    trainIdx = std::move(drawn);
    nTrain = draws;
  }
  report.trainSamples = static_cast<int>(nTrain);
  report.validationSamples = static_cast<int>(validation.size());

  // Batch norm needs at least two samples per batch.
  const std::size_t batchSize = std::min<std::size_t>(cfg.batchSize, nTrain);
  auto optimizer = makeOptimizer<double>(cfg.optimizer, cfg.learningRate);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(trainIdx.begin(), trainIdx.end(), rng);
    LossBreakdown<double> epochLoss;
    double seen = 0.0;
    for (std::size_t start = 0; start < nTrain; start += batchSize) {
      const std::size_t end = std::min(nTrain, start + batchSize);
      if (end - start < 2 && start > 0) break;
      std::vector<const Sample*> ptrs;
      for (std::size_t i = start; i < end; ++i) ptrs.push_back(&data[trainIdx[i]]);
      const auto loss = trainStep(net, makeBatch(net, ptrs), cfg, *optimizer, rng);
      accumulate(epochLoss, loss, static_cast<double>(end - start));
      seen += static_cast<double>(end - start);
    }
    LossBreakdown<double> mean;
    accumulate(mean, epochLoss, 1.0 / seen);
    if (epoch == 0) report.firstEpoch = mean;
    report.lastEpoch = mean;
  }
  report.validation = evaluateLoss(net, validation, cfg);
  return report;
}

namespace {

constexpr const char* kMagic = "betazero-checkpoint";
constexpr int kVersion = 1;

std::string hex(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", x);
  return buf;
}

void writeVector(std::ostream& out, const Eigen::VectorXd& v) {
  out << v.size();
  for (Eigen::Index i = 0; i < v.size(); ++i) out << ' ' << hex(v[i]);
  out << '\n';
}

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  std::string word() {
    std::string w;
    if (!(in_ >> w)) throw std::runtime_error("checkpoint: unexpected end of file");
    return w;
  }
  void expect(const std::string& key) {
    const auto w = word();
    if (w != key) throw std::runtime_error("checkpoint: expected '" + key + "', got '" + w + "'");
  }
  long integer() { return std::stol(word()); }
  double real() {
    const auto w = word();
    char* end = nullptr;
    const double x = std::strtod(w.c_str(), &end);
    if (end == w.c_str()) throw std::runtime_error("checkpoint: bad number '" + w + "'");
    return x;
  }
  Eigen::VectorXd vector(Eigen::Index expected = -1) {
    const long n = integer();
    if (expected >= 0 && n != expected) throw std::runtime_error("checkpoint: size mismatch");
    Eigen::VectorXd v(n);
    for (long i = 0; i < n; ++i) v[i] = real();
    return v;
  }

 private:
  std::istream& in_;
};

}  // namespace

void saveCheckpoint(const PolicyValueNetd& net, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write checkpoint " + path);
  const auto& s = net.spec();
  out << kMagic << ' ' << kVersion << '\n';
  out << "input " << s.inputDim << "\nactions " << s.numActions << '\n';
  out << "trunk " << s.trunkWidths.size();
  for (int w : s.trunkWidths) out << ' ' << w;
  out << "\nhead " << s.headWidths.size();
  for (int w : s.headWidths) out << ' ' << w;
  out << "\nbatchnorm " << (s.batchNorm ? 1 : 0) << "\ndropout " << hex(s.dropout)
      << "\nmomentum " << hex(s.batchNormMomentum) << '\n';
  out << "theta ";
  writeVector(out, net.parameters());
  out << "bn " << net.runningMeans().size() << '\n';
  for (std::size_t i = 0; i < net.runningMeans().size(); ++i) {
    writeVector(out, net.runningMeans()[i]);
    writeVector(out, net.runningVars()[i]);
  }
  const auto& rs = net.returnStats();
  out << "returns " << rs.count << ' ' << hex(rs.mean) << ' ' << hex(rs.m2) << '\n';
  const auto& fs = net.inputStats();
  out << "inputs " << fs.count << '\n';
  writeVector(out, fs.mean);
  writeVector(out, fs.m2);
  if (!out) throw std::runtime_error("failed writing checkpoint " + path);
}

PolicyValueNetd loadCheckpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read checkpoint " + path);
  Reader r(in);
  r.expect(kMagic);
  if (r.integer() != kVersion) throw std::runtime_error("checkpoint: unsupported version");
  NetworkSpec s;
  r.expect("input");
  s.inputDim = static_cast<int>(r.integer());
  r.expect("actions");
  s.numActions = static_cast<int>(r.integer());
  r.expect("trunk");
  s.trunkWidths.resize(r.integer());
  for (int& w : s.trunkWidths) w = static_cast<int>(r.integer());
  r.expect("head");
  s.headWidths.resize(r.integer());
  for (int& w : s.headWidths) w = static_cast<int>(r.integer());
  r.expect("batchnorm");
  s.batchNorm = r.integer() != 0;
  r.expect("dropout");
  s.dropout = r.real();
  r.expect("momentum");
  s.batchNormMomentum = r.real();

  PolicyValueNetd net(s);
  r.expect("theta");
  net.parameters() = r.vector(net.parameterCount());
  r.expect("bn");
  if (static_cast<std::size_t>(r.integer()) != net.runningMeans().size())
    throw std::runtime_error("checkpoint: batch norm layer count mismatch");
  for (std::size_t i = 0; i < net.runningMeans().size(); ++i) {
    net.runningMeans()[i] = r.vector(net.runningMeans()[i].size());
    net.runningVars()[i] = r.vector(net.runningVars()[i].size());
  }
  r.expect("returns");
  auto& rs = net.returnStats();
  rs.count = static_cast<std::uint64_t>(r.integer());
  rs.mean = r.real();
  rs.m2 = r.real();
  r.expect("inputs");
  auto& fs = net.inputStats();
  fs.count = static_cast<std::uint64_t>(r.integer());
  fs.mean = r.vector(s.inputDim);
  fs.m2 = r.vector(s.inputDim);
  net.refreshInputTransform();
  return net;
}

}  // namespace betazero
