#pragma once

#include "betazero/mcts/search.hpp"
#include "betazero/nnet/policy_value_net.hpp"

namespace betazero {

/// Leaf evaluation by the policy/value network on phi(b).
template <GenerativePomdp P>
class NetworkGuide {
 public:
  NetworkGuide(const P& problem, const PolicyValueNetd& net,
               RepresentationMode mode = RepresentationMode::MeanStd)
      : problem_(problem), net_(net), mode_(mode) {}

  LeafEstimate evaluate(const ParticleBelief<typename P::State>& b, Rng&) const {
    const auto out = net_.forward(represent(problem_, b, mode_));
    return {out.policy, out.value};
  }

 private:
  const P& problem_;
  const PolicyValueNetd& net_;
  RepresentationMode mode_;
};

/// Heuristic-free leaf evaluation: uniform prior and the discounted return
/// of a uniformly random rollout from one particle.
template <GenerativePomdp P>
class RolloutGuide {
 public:
  RolloutGuide(const P& problem, int rolloutDepth)
      : problem_(problem), depth_(rolloutDepth) {}

  LeafEstimate evaluate(const ParticleBelief<typename P::State>& b, Rng& rng) const {
    const int nA = problem_.numActions();
    LeafEstimate est{Eigen::VectorXd::Constant(nA, 1.0 / nA), 0.0};
    if (b.empty()) return est;
    auto s = b.particles[uniformIndex(rng, static_cast<int>(b.size()))];
    double discount = 1.0;
    for (int t = 0; t < depth_ && !problem_.isTerminal(s); ++t) {
      const ActionIndex a = uniformIndex(rng, nA);
      const auto next = problem_.sampleTransition(s, a, rng);
      est.value += discount * problem_.reward(s, a, next);
      discount *= problem_.discount();
      s = next;
    }
    return est;
  }

 private:
  const P& problem_;
  int depth_;
};

/// Planning with the network guide.
template <GenerativePomdp P>
PlanResult betaZeroPlan(const P& problem, const ParticleBelief<typename P::State>& belief,
                        const PolicyValueNetd& net, const SearchConfig& cfg, std::uint64_t seed,
                        RepresentationMode mode = RepresentationMode::MeanStd) {
  NetworkGuide<P> guide(problem, net, mode);
  BeliefMcts<P, NetworkGuide<P>> mcts(problem, guide, cfg);
  return mcts.plan(belief, seed);
}

/// Same skeleton as BetaZero with UCT selection, uniform widening and random
/// rollouts at the leaves.
template <GenerativePomdp P>
ActionIndex rolloutBaselinePlan(const P& problem, const ParticleBelief<typename P::State>& belief,
                                SearchConfig cfg, int rolloutDepth, std::uint64_t seed) {
  cfg.selection = SelectionRule::UCT;
  cfg.uniformWidening = true;
  cfg.bootstrapQ0 = false;
  RolloutGuide<P> guide(problem, rolloutDepth);
  BeliefMcts<P, RolloutGuide<P>> mcts(problem, guide, cfg);
  return mcts.plan(belief, seed).action;
}

}  // namespace betazero
