#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include "betazero/belief.hpp"
#include "betazero/belief_mdp.hpp"
#include "betazero/random.hpp"

namespace betazero {

enum class FinalCriterion { Sample, Argmax };
enum class SelectionRule { PUCT, UCT };

struct SearchConfig {
  int nOnline = 100;
  double c = 1.0;
  double kAction = 2.0;
  double alphaAction = 0.25;
  double kState = 2.0;
  double alphaState = 0.1;
  /// When off, every action is added on the first visit.
  bool actionWidening = true;
  /// When off, each edge holds exactly one child belief.
  bool stateWidening = true;
  int depth = 10;
  double temperature = 0.0;
  double zQ = 1.0;
  double zN = 1.0;
  bool bootstrapQ0 = false;
  FinalCriterion finalCriterion = FinalCriterion::Sample;
  SelectionRule selection = SelectionRule::PUCT;
  /// Divide the PUCT prior by its mass over the widened actions.
  bool renormalizePrior = false;
  /// Widen by sampling absent actions uniformly instead of from the prior.
  bool uniformWidening = false;
  bool recordBackups = false;
  UpdateOptions update;
};

/// Network (or rollout) evaluation of a belief: prior over actions and value.
struct LeafEstimate {
  Eigen::VectorXd prior;
  double value = 0.0;
};

template <class G, class State>
concept SearchGuide = requires(const G& g, const ParticleBelief<State>& b, Rng& rng) {
  { g.evaluate(b, rng) } -> std::same_as<LeafEstimate>;
};

template <class State>
struct BeliefNode {
  ParticleBelief<State> belief;
  bool terminal = false;
  bool evaluated = false;
  int visits = 0;
  double value = 0.0;
  Eigen::VectorXd prior;
  std::vector<int> edges;
};

struct ActionEdge {
  int parent = -1;
  ActionIndex action = 0;
  int visits = 0;
  double q = 0.0;
  double q0 = 0.0;
  double prior = 0.0;
  double reward = 0.0;
  std::vector<int> children;
  std::vector<double> backups;
};

/// Node and edge storage for one planning call. Deques keep references
/// stable while the tree grows.
template <class State>
struct SearchTree {
  std::deque<BeliefNode<State>> nodes;
  std::deque<ActionEdge> edges;

  int addNode(ParticleBelief<State> belief, bool terminal) {
    auto& node = nodes.emplace_back();
    node.belief = std::move(belief);
    node.terminal = terminal;
    return static_cast<int>(nodes.size()) - 1;
  }
};

inline double puctScore(double q, double c, double prior, int parentVisits, int edgeVisits) {
  return q + c * prior * std::sqrt(static_cast<double>(parentVisits)) / (1.0 + edgeVisits);
}

/// Unvisited edges score +inf so each is tried once.
inline double uctScore(double q, double c, int parentVisits, int edgeVisits) {
  if (edgeVisits == 0) return std::numeric_limits<double>::infinity();
  return q + c * std::sqrt(std::log(static_cast<double>(parentVisits)) / edgeVisits);
}

/// Progressive widening test |children| <= k N^alpha.
inline bool wideningAllowed(std::size_t children, double k, double alpha, int visits) {
  return static_cast<double>(children) <= k * std::pow(static_cast<double>(visits), alpha);
}

/// Q-weighted visit-count policy over `numActions` actions:
/// pi(a) ~ (softmax(Q)[a]^zQ (N(a)/sum N)^zN)^(1/tau). Absent actions get 0.
/// tau < 1e-6 gives the one-hot argmax (lowest index on ties), and
/// zQ = zN = 0 gives the uniform distribution over present actions.
Eigen::VectorXd treePolicy(std::span<const double> q, std::span<const int> visits,
                           std::span<const char> present, double zQ, double zN,
                           double temperature);

/// Index of the largest entry, lowest index on ties.
int argmaxLowest(const Eigen::Ref<const Eigen::VectorXd>& v);

struct PlanResult {
  ActionIndex action = 0;
  Eigen::VectorXd policy;
};

/// Belief-state MCTS with double progressive widening.
template <GenerativePomdp P, class Guide>
  requires SearchGuide<Guide, typename P::State>
class BeliefMcts {
 public:
  using State = typename P::State;
  using Belief = ParticleBelief<State>;

  BeliefMcts(const P& problem, const Guide& guide, SearchConfig cfg)
      : problem_(problem), guide_(guide), cfg_(cfg) {}

  const SearchTree<State>& tree() const noexcept { return tree_; }
  const SearchConfig& config() const noexcept { return cfg_; }

  /// Fresh tree, nOnline simulations from `root`, then the root tree policy.
  PlanResult plan(const Belief& root, std::uint64_t seed) {
    tree_ = {};
    rng_.seed(seed);
    const int rootId = tree_.addNode(root, false);
    evaluate(rootId);
    for (int i = 0; i < cfg_.nOnline; ++i) simulate(rootId, cfg_.depth);

    PlanResult out;
    // No edges only happens with nOnline = 0: fall back to the prior.
    out.policy = tree_.nodes[rootId].edges.empty() ? tree_.nodes[rootId].prior : rootPolicy(rootId);
    // zQ = zN = 0 makes the policy uniform; taking its argmax would always
    // pick the lowest index, so that case is sampled under either criterion.
    const bool uniform = cfg_.zQ == 0.0 && cfg_.zN == 0.0;
    if (cfg_.finalCriterion == FinalCriterion::Argmax && !uniform) {
      out.action = argmaxLowest(out.policy);
    } else {
      out.action = sampleCategorical(
          std::span<const double>(out.policy.data(), static_cast<std::size_t>(out.policy.size())),
          rng_);
    }
    return out;
  }

  Eigen::VectorXd rootPolicy(int node) const {
    const int n = problem_.numActions();
    std::vector<double> q(n, 0.0);
    std::vector<int> visits(n, 0);
    std::vector<char> present(n, 0);
    for (int e : tree_.nodes[node].edges) {
      const auto& edge = tree_.edges[e];
      q[edge.action] = edge.q;
      visits[edge.action] = edge.visits;
      present[edge.action] = 1;
    }
    return treePolicy(q, visits, present, cfg_.zQ, cfg_.zN, cfg_.temperature);
  }

  /// Returns the backed-up value of one simulation from `node`.
  double simulate(int nodeId, int depth) {
    if (depth <= 0) return 0.0;
    if (tree_.nodes[nodeId].terminal) return 0.0;
    if (!tree_.nodes[nodeId].evaluated) return evaluate(nodeId);

    ++tree_.nodes[nodeId].visits;
    const int edgeId = selectAction(nodeId);
    const auto child = expandBelief(edgeId);
    if (!child) {
      // Pruned branch: undo the visit so counts stay consistent.
      --tree_.nodes[nodeId].visits;
      return tree_.nodes[nodeId].value;
    }
    const auto& childNode = tree_.nodes[*child];
    double q = tree_.edges[edgeId].reward;
    if (!childNode.terminal) q += problem_.discount() * simulate(*child, depth - 1);

    auto& edge = tree_.edges[edgeId];
    ++edge.visits;
    edge.q += (q - edge.q) / edge.visits;
    if (cfg_.recordBackups) edge.backups.push_back(q);
    return q;
  }

  /// Widens A(b) when allowed, then picks the best edge by PUCT (or UCT).
  int selectAction(int nodeId) {
    auto& node = tree_.nodes[nodeId];
    const int nA = problem_.numActions();
    if (!cfg_.actionWidening) {
      if (node.edges.empty())
        for (ActionIndex a = 0; a < nA; ++a) addEdge(nodeId, a);
    } else if (static_cast<int>(node.edges.size()) < nA &&
               wideningAllowed(node.edges.size(), cfg_.kAction, cfg_.alphaAction, node.visits)) {
      addEdge(nodeId, sampleNewAction(nodeId));
    }

    const auto& n = tree_.nodes[nodeId];
    double priorMass = 1.0;
    if (cfg_.renormalizePrior) {
      priorMass = 0.0;
      for (int e : n.edges) priorMass += tree_.edges[e].prior;
      if (priorMass <= 0.0) priorMass = 1.0;
    }
    int best = -1;
    double bestScore = -std::numeric_limits<double>::infinity();
    ActionIndex bestAction = nA;
    for (int e : n.edges) {
      const auto& edge = tree_.edges[e];
      const double score =
          cfg_.selection == SelectionRule::PUCT
              ? puctScore(edge.q, cfg_.c, edge.prior / priorMass, n.visits, edge.visits)
              : uctScore(edge.q, cfg_.c, n.visits, edge.visits);
      if (best < 0 || score > bestScore || (score == bestScore && edge.action < bestAction)) {
        best = e;
        bestScore = score;
        bestAction = edge.action;
      }
    }
    return best;
  }

  /// Returns the child belief node for this visit, or nothing when the
  /// particle filter depleted twice in a row.
  std::optional<int> expandBelief(int edgeId) {
    const auto& edge = tree_.edges[edgeId];
    const bool widen =
        cfg_.stateWidening
            ? wideningAllowed(edge.children.size(), cfg_.kState, cfg_.alphaState, edge.visits)
            : edge.children.empty();
    if (!widen) {
      const int pick = uniformIndex(rng_, static_cast<int>(edge.children.size()));
      return edge.children[pick];
    }
    for (int attempt = 0; attempt < 2; ++attempt) {
      auto next = transition(tree_.nodes[edge.parent].belief, edge.action);
      if (!next) continue;
      const int child = tree_.addNode(std::move(next->belief), next->terminal);
      tree_.edges[edgeId].children.push_back(child);
      return child;
    }
    return std::nullopt;
  }

  /// Q0 = R_b(b, a) + gamma V(b') for one sampled b'; 0 on depletion.
  double bootstrapQ0(const Belief& belief, ActionIndex a, double reward) {
    auto next = transition(belief, a);
    if (!next) return 0.0;
    if (next->terminal) return reward;
    return reward + problem_.discount() * guide_.evaluate(next->belief, rng_).value;
  }

 private:
  double evaluate(int nodeId) {
    auto& node = tree_.nodes[nodeId];
    auto est = guide_.evaluate(node.belief, rng_);
    node.prior = std::move(est.prior);
    node.value = est.value;
    node.evaluated = true;
    return node.value;
  }

  /// Draws s ~ b, s' ~ T, o ~ O and updates. Terminal successors skip the
  /// filter update since nothing is planned below them.
  std::optional<BeliefTransition<State>> transition(const Belief& belief, ActionIndex a) {
    const auto& s = belief.particles[uniformIndex(rng_, static_cast<int>(belief.size()))];
    const auto next = problem_.sampleTransition(s, a, rng_);
    if (problem_.isTerminal(next)) return BeliefTransition<State>{Belief{}, true};
    const auto obs = problem_.sampleObservation(a, next, rng_);
    try {
      return BeliefTransition<State>{updateBelief(problem_, belief, a, obs, rng_, cfg_.update),
                                     false};
    } catch (const ParticleDepletion&) {
      return std::nullopt;
    }
  }

  ActionIndex sampleNewAction(int nodeId) {
    const auto& node = tree_.nodes[nodeId];
    const int nA = problem_.numActions();
    std::vector<double> weights(nA, 1.0);
    if (!cfg_.uniformWidening && cfg_.selection == SelectionRule::PUCT)
      for (int a = 0; a < nA; ++a) weights[a] = node.prior[a];
    double mass = 0.0;
    for (int e : node.edges) weights[tree_.edges[e].action] = 0.0;
    for (double w : weights) mass += w;
    if (mass <= 0.0) {
      // Prior has no mass left on absent actions; fall back to uniform.
      for (int a = 0; a < nA; ++a) weights[a] = 1.0;
      for (int e : node.edges) weights[tree_.edges[e].action] = 0.0;
    }
    return sampleCategorical(weights, rng_);
  }

  void addEdge(int nodeId, ActionIndex a) {
    ActionEdge edge;
    edge.parent = nodeId;
    edge.action = a;
    const auto& node = tree_.nodes[nodeId];
    edge.prior = node.prior.size() > a ? node.prior[a] : 0.0;
    edge.reward = beliefReward(problem_, node.belief, a, rng_);
    if (cfg_.bootstrapQ0) edge.q0 = bootstrapQ0(node.belief, a, edge.reward);
    edge.q = edge.q0;
    tree_.edges.push_back(std::move(edge));
    tree_.nodes[nodeId].edges.push_back(static_cast<int>(tree_.edges.size()) - 1);
  }

  const P& problem_;
  const Guide& guide_;
  SearchConfig cfg_;
  SearchTree<State> tree_;
  Rng rng_;
};

/// Writes one JSON object per node and per edge.
template <class State>
void writeTreeJsonLines(std::ostream& out, const SearchTree<State>& tree);

}  // namespace betazero

#include "betazero/mcts/search_impl.hpp"
