#include <gtest/gtest.h>

#include <json.hpp>
#include <sstream>

#include "betazero/envs/light_dark.hpp"
#include "betazero/mcts/guides.hpp"
#include "support/oracles.hpp"

using namespace betazero;
using namespace betazero::oracle;

namespace {

ParticleBelief<LightDarkState> lightDarkBelief(std::uint64_t seed, int n = 100) {
  const LightDark ld;
  Rng rng(seed);
  return sampleInitialBelief(ld, n, rng);
}

PolicyValueNetd randomNet(std::uint64_t seed) {
  Rng rng(seed);
  PolicyValueNetd net(NetworkSpec::lightDark(), rng);
  for (auto& t : net.parameters()) t = 0.3 * standardNormal(rng);
  return net;
}

template <class Mcts>
void expectTreeInvariants(const Mcts& mcts) {
  const auto& tree = mcts.tree();
  for (const auto& node : tree.nodes) {
    int edgeVisits = 0;
    for (int e : node.edges) edgeVisits += tree.edges[e].visits;
    EXPECT_EQ(node.visits, edgeVisits);
  }
  for (const auto& edge : tree.edges) {
    ASSERT_EQ(static_cast<int>(edge.backups.size()), edge.visits);
    double q = edge.q0;
    for (int i = 0; i < edge.visits; ++i) q += (edge.backups[i] - q) / (i + 1);
    EXPECT_NEAR(q, edge.q, 1e-9);
    if (edge.visits > 0) {
      double mean = 0.0;
      for (double b : edge.backups) mean += b;
      EXPECT_NEAR(mean / edge.visits, edge.q, 1e-9);
    }
  }
}

}  // namespace

TEST(Scores, Puct) {
  EXPECT_NEAR(puctScore(0.5, 1.0, 0.2, 4, 1), 0.7, 1e-12);
  EXPECT_EQ(puctScore(0.5, 0.0, 0.9, 100, 0), 0.5);
}

TEST(Scores, Uct) {
  EXPECT_NEAR(uctScore(1.0, 1.0, 10, 1), 1.0 + std::sqrt(std::log(10.0)), 1e-12);
  EXPECT_NEAR(uctScore(1.0, 1.0, 10, 1), 2.517, 1e-3);
  EXPECT_EQ(uctScore(1.0, 0.0, 10, 3), 1.0);
  EXPECT_TRUE(std::isinf(uctScore(0.0, 1.0, 10, 0)));
}

TEST(Widening, ConditionUsesLessOrEqual) {
  EXPECT_TRUE(wideningAllowed(1, 2.0, 0.25, 1));
  EXPECT_TRUE(wideningAllowed(2, 2.0, 0.1, 1));
  EXPECT_FALSE(wideningAllowed(3, 2.0, 0.1, 1));
  EXPECT_TRUE(wideningAllowed(1, 1.0, 0.0, 50));
  EXPECT_FALSE(wideningAllowed(2, 1.0, 0.0, 50));
}

TEST(TreePolicy, UniformCountsReduceToSoftmax) {
  const std::vector<double> q{0, 1, 2};
  const std::vector<int> n{10, 10, 10};
  const std::vector<char> present{1, 1, 1};
  const auto pi = treePolicy(q, n, present, 1.0, 1.0, 1.0);
  const auto soft = softmaxOracle(q);
  for (int a = 0; a < 3; ++a) EXPECT_NEAR(pi[a], soft[a], 1e-6);
  EXPECT_NEAR(pi[0], 0.0900, 1e-4);
  EXPECT_NEAR(pi[1], 0.2447, 1e-4);
  EXPECT_NEAR(pi[2], 0.6652, 1e-4);
}

TEST(TreePolicy, ZeroExponentsGiveUniform) {
  const std::vector<double> q{0, 1, 2, 7};
  const std::vector<int> n{10, 3, 10, 0};
  const std::vector<char> present{1, 1, 1, 0};
  const auto pi = treePolicy(q, n, present, 0.0, 0.0, 1.0);
  for (int a = 0; a < 3; ++a) EXPECT_NEAR(pi[a], 1.0 / 3.0, 1e-6);
  EXPECT_EQ(pi[3], 0.0);
}

TEST(TreePolicy, ZeroTemperatureIsOneHot) {
  const std::vector<double> q{0, 1, 2};
  const std::vector<int> n{10, 10, 10};
  const std::vector<char> present{1, 1, 1};
  const auto pi = treePolicy(q, n, present, 1.0, 1.0, 0.0);
  EXPECT_NEAR(pi[2], 1.0, 1e-6);
  EXPECT_NEAR(pi[0] + pi[1], 0.0, 1e-6);
  const auto tiny = treePolicy(q, n, present, 1.0, 1.0, 1e-7);
  EXPECT_EQ(tiny, pi);
}

TEST(TreePolicy, TiesGoToLowestIndex) {
  const std::vector<double> q{1, 3, 3};
  const std::vector<int> n{5, 5, 5};
  const std::vector<char> present{1, 1, 1};
  const auto pi = treePolicy(q, n, present, 1.0, 1.0, 0.0);
  EXPECT_EQ(pi[1], 1.0);
}

TEST(TreePolicy, AbsentActionsGetZero) {
  const std::vector<double> q{5, 1, 2};
  const std::vector<int> n{0, 4, 6};
  const std::vector<char> present{0, 1, 1};
  const auto pi = treePolicy(q, n, present, 1.0, 1.0, 1.0);
  EXPECT_EQ(pi[0], 0.0);
  EXPECT_NEAR(pi.sum(), 1.0, 1e-12);
}

TEST(TreePolicy, ArgmaxShiftInvariance) {
  EXPECT_EQ(argmaxShiftFailures(100, 1), 0);
}

TEST(TreePolicy, ExtremeValuesStayFinite) {
  const std::vector<double> q{-1e6, 0, 1e6};
  const std::vector<int> n{1, 1000000, 1};
  const std::vector<char> present{1, 1, 1};
  const auto pi = treePolicy(q, n, present, 1.0, 1.0, 0.01);
  EXPECT_TRUE(pi.allFinite());
  EXPECT_NEAR(pi.sum(), 1.0, 1e-9);
}

TEST(Search, ExpectimaxOracle) {
  EXPECT_LT(toyExpectimaxError(10000, 3), 0.05);
}

TEST(Search, ToyTreeInvariants) {
  const ToyTree toy;
  const UniformZeroGuide guide;
  SearchConfig cfg;
  cfg.nOnline = 500;
  cfg.depth = 2;
  cfg.actionWidening = false;
  cfg.recordBackups = true;
  BeliefMcts<ToyTree, UniformZeroGuide> mcts(toy, guide, cfg);
  mcts.plan(ParticleBelief<ToyState>(std::vector<ToyState>(4, ToyState{0})), 3);
  expectTreeInvariants(mcts);
}

TEST(Search, DepthOneBacksUpImmediateReward) {
  // Depth 0 returns 0 before any value lookup, so a depth-1 search sees r only.
  const ToyTree toy;
  const UniformZeroGuide guide;
  SearchConfig cfg;
  cfg.nOnline = 50;
  cfg.depth = 1;
  cfg.actionWidening = false;
  cfg.recordBackups = true;
  BeliefMcts<ToyTree, UniformZeroGuide> mcts(toy, guide, cfg);
  mcts.plan(ParticleBelief<ToyState>(std::vector<ToyState>(4, ToyState{0})), 1);
  for (const auto& edge : mcts.tree().edges)
    for (double q : edge.backups) EXPECT_EQ(q, toy.rewards[0][edge.action]);
}

TEST(Search, FirstChildVisitUsesValueEstimate) {
  const LightDark ld;
  const auto net = randomNet(2);
  NetworkGuide<LightDark> guide(ld, net);
  SearchConfig cfg;
  cfg.nOnline = 2;
  cfg.depth = 2;
  cfg.actionWidening = false;
  cfg.recordBackups = true;
  BeliefMcts<LightDark, NetworkGuide<LightDark>> mcts(ld, guide, cfg);
  mcts.plan(lightDarkBelief(3), 4);
  const auto& tree = mcts.tree();
  for (const auto& edge : tree.edges) {
    if (edge.visits == 0 || edge.parent != 0) continue;
    const auto& child = tree.nodes[edge.children.front()];
    const double expected =
        child.terminal ? edge.reward : edge.reward + ld.discount() * child.value;
    EXPECT_NEAR(edge.backups.front(), expected, 1e-12);
  }
}

TEST(Search, TerminalChildBacksUpReward) {
  const LightDark ld;
  Rng rng(3);
  const PolicyValueNetd net(NetworkSpec::lightDark(), rng);
  NetworkGuide<LightDark> guide(ld, net);
  SearchConfig cfg;
  cfg.nOnline = 200;
  cfg.c = 100.0;
  cfg.actionWidening = false;
  cfg.recordBackups = true;
  BeliefMcts<LightDark, NetworkGuide<LightDark>> mcts(ld, guide, cfg);
  mcts.plan(lightDarkBelief(5), 6);
  int checked = 0;
  for (const auto& edge : mcts.tree().edges) {
    if (edge.action != LightDark::kStop) continue;
    for (int c : edge.children) EXPECT_TRUE(mcts.tree().nodes[c].terminal);
    for (double q : edge.backups) {
      EXPECT_EQ(q, edge.reward);
      ++checked;
    }
  }
  EXPECT_GT(checked, 0);
}

TEST(Search, CountAndRunningAverageInvariants) {
  const LightDark ld;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto net = randomNet(10 + seed);
    NetworkGuide<LightDark> guide(ld, net);
    SearchConfig cfg;
    cfg.nOnline = 300;
    cfg.recordBackups = true;
    cfg.bootstrapQ0 = seed % 2 == 1;
    BeliefMcts<LightDark, NetworkGuide<LightDark>> mcts(ld, guide, cfg);
    mcts.plan(lightDarkBelief(seed), seed);
    expectTreeInvariants(mcts);
  }
}

TEST(Search, ActionWideningBound) {
  const LightDark ld;
  const auto net = randomNet(4);
  NetworkGuide<LightDark> guide(ld, net);
  for (double k : {0.5, 1.0, 1.7}) {
    SearchConfig cfg;
    cfg.nOnline = 300;
    cfg.kAction = k;
    cfg.alphaAction = 0.0;
    BeliefMcts<LightDark, NetworkGuide<LightDark>> mcts(ld, guide, cfg);
    mcts.plan(lightDarkBelief(7), 8);
    for (const auto& node : mcts.tree().nodes)
      EXPECT_LE(static_cast<double>(node.edges.size()), std::ceil(k) + 1);
  }
}

TEST(Search, StateWideningBound) {
  const LightDark ld;
  const auto net = randomNet(5);
  NetworkGuide<LightDark> guide(ld, net);
  SearchConfig cfg;
  cfg.nOnline = 400;
  cfg.kState = 1.0;
  cfg.alphaState = 0.0;
  BeliefMcts<LightDark, NetworkGuide<LightDark>> mcts(ld, guide, cfg);
  mcts.plan(lightDarkBelief(9), 10);
  bool sawTwo = false;
  for (const auto& edge : mcts.tree().edges) {
    EXPECT_LE(edge.children.size(), 2u);
    sawTwo |= edge.children.size() == 2;
  }
  EXPECT_TRUE(sawTwo);
}

TEST(Search, UnboundedStateWideningCreatesChildPerVisit) {
  const LightDark ld;
  const auto net = randomNet(6);
  NetworkGuide<LightDark> guide(ld, net);
  SearchConfig cfg;
  cfg.nOnline = 200;
  cfg.kState = 1e9;
  BeliefMcts<LightDark, NetworkGuide<LightDark>> mcts(ld, guide, cfg);
  mcts.plan(lightDarkBelief(11), 12);
  for (const auto& edge : mcts.tree().edges)
    EXPECT_EQ(static_cast<int>(edge.children.size()), edge.visits);
}

TEST(Search, DisabledStateWideningKeepsOneChild) {
  const LightDark ld;
  const auto net = randomNet(7);
  NetworkGuide<LightDark> guide(ld, net);
  SearchConfig cfg;
  cfg.nOnline = 200;
  cfg.stateWidening = false;
  BeliefMcts<LightDark, NetworkGuide<LightDark>> mcts(ld, guide, cfg);
  mcts.plan(lightDarkBelief(13), 14);
  for (const auto& edge : mcts.tree().edges) EXPECT_LE(edge.children.size(), 1u);
}

TEST(Search, GreedyWithoutExploration) {
  const ToyTree toy;
  const UniformZeroGuide guide;
  SearchConfig cfg;
  cfg.nOnline = 40;
  cfg.depth = 1;
  cfg.c = 0.0;
  cfg.actionWidening = false;
  BeliefMcts<ToyTree, UniformZeroGuide> mcts(toy, guide, cfg);
  mcts.plan(ParticleBelief<ToyState>(std::vector<ToyState>(4, ToyState{0})), 1);
  // Both edges start at Q = 0; the lowest index wins the tie, earns 0.5 and
  // is then chosen greedily forever.
  const auto& tree = mcts.tree();
  EXPECT_EQ(tree.edges[tree.nodes[0].edges[0]].visits, 40);
  EXPECT_EQ(tree.edges[tree.nodes[0].edges[1]].visits, 0);
}

TEST(Plan, SingleIterationWidensOnce) {
  const LightDark ld;
  Rng rng(1);
  const PolicyValueNetd net(NetworkSpec::lightDark(), rng);
  SearchConfig cfg;
  cfg.nOnline = 1;
  const auto r = betaZeroPlan(ld, lightDarkBelief(15), net, cfg, 16);
  int support = 0;
  for (int a = 0; a < 3; ++a) support += r.policy[a] > 0.0;
  EXPECT_EQ(support, 1);
  EXPECT_EQ(r.policy[r.action], 1.0);
}

TEST(Plan, Deterministic) {
  const LightDark ld;
  const auto net = randomNet(8);
  SearchConfig cfg;
  cfg.nOnline = 100;
  cfg.temperature = 1.0;
  const auto belief = lightDarkBelief(17);
  const auto a = betaZeroPlan(ld, belief, net, cfg, 18);
  const auto b = betaZeroPlan(ld, belief, net, cfg, 18);
  EXPECT_EQ(a.action, b.action);
  EXPECT_EQ(a.policy, b.policy);
}

TEST(Plan, RootBeliefIsNotMutated) {
  const LightDark ld;
  const auto net = randomNet(9);
  const auto belief = lightDarkBelief(19);
  const auto copy = belief;
  SearchConfig cfg;
  cfg.nOnline = 100;
  betaZeroPlan(ld, belief, net, cfg, 20);
  EXPECT_EQ(belief.particles, copy.particles);
}

TEST(Plan, PolicySupportedOnWidenedActions) {
  const LightDark ld;
  const auto net = randomNet(10);
  NetworkGuide<LightDark> guide(ld, net);
  SearchConfig cfg;
  cfg.nOnline = 20;
  cfg.temperature = 1.0;
  BeliefMcts<LightDark, NetworkGuide<LightDark>> mcts(ld, guide, cfg);
  const auto r = mcts.plan(lightDarkBelief(21), 22);
  std::vector<char> present(3, 0);
  for (int e : mcts.tree().nodes[0].edges) present[mcts.tree().edges[e].action] = 1;
  for (int a = 0; a < 3; ++a)
    if (!present[a]) EXPECT_EQ(r.policy[a], 0.0);
  EXPECT_NEAR(r.policy.sum(), 1.0, 1e-9);
}

TEST(Plan, UniformPolicyIsSampledUnderArgmax) {
  const LightDark ld;
  const auto net = randomNet(11);
  SearchConfig cfg;
  cfg.nOnline = 30;
  cfg.actionWidening = false;
  cfg.zQ = 0.0;
  cfg.zN = 0.0;
  cfg.finalCriterion = FinalCriterion::Argmax;
  std::array<int, 3> counts{};
  const auto belief = lightDarkBelief(23);
  for (std::uint64_t seed = 0; seed < 300; ++seed)
    ++counts[betaZeroPlan(ld, belief, net, cfg, seed).action];
  for (int c : counts) EXPECT_GT(c, 60);
}

TEST(Bootstrap, ZeroDiscountGivesBeliefReward) {
  LightDarkParams p = LightDarkParams::lightDark10();
  p.discount = 0.0;
  const LightDark ld(p);
  const auto net = randomNet(12);
  NetworkGuide<LightDark> guide(ld, net);
  BeliefMcts<LightDark, NetworkGuide<LightDark>> mcts(ld, guide, {});
  const auto b = lightDarkBelief(24);
  EXPECT_EQ(mcts.bootstrapQ0(b, LightDark::kUp, 3.25), 3.25);
}

TEST(Bootstrap, ZeroValueHeadGivesBeliefReward) {
  const LightDark ld;
  Rng rng(2);
  const PolicyValueNetd net(NetworkSpec::lightDark(), rng);
  NetworkGuide<LightDark> guide(ld, net);
  BeliefMcts<LightDark, NetworkGuide<LightDark>> mcts(ld, guide, {});
  EXPECT_EQ(mcts.bootstrapQ0(lightDarkBelief(25), LightDark::kDown, -1.5), -1.5);
}

TEST(Bootstrap, TerminalSuccessorHasNoValueTerm) {
  const LightDark ld;
  const auto net = randomNet(13);
  NetworkGuide<LightDark> guide(ld, net);
  BeliefMcts<LightDark, NetworkGuide<LightDark>> mcts(ld, guide, {});
  EXPECT_EQ(mcts.bootstrapQ0(lightDarkBelief(26), LightDark::kStop, 12.0), 12.0);
}

TEST(Bootstrap, EdgesStartAtQ0) {
  const LightDark ld;
  const auto net = randomNet(14);
  NetworkGuide<LightDark> guide(ld, net);
  SearchConfig cfg;
  cfg.nOnline = 1;
  cfg.actionWidening = false;
  cfg.bootstrapQ0 = true;
  BeliefMcts<LightDark, NetworkGuide<LightDark>> mcts(ld, guide, cfg);
  mcts.plan(lightDarkBelief(27), 28);
  int unvisited = 0;
  for (const auto& edge : mcts.tree().edges) {
    if (edge.visits > 0) continue;
    ++unvisited;
    EXPECT_EQ(edge.q, edge.q0);
  }
  EXPECT_EQ(unvisited, 2);
}

TEST(Rollout, TerminalBeliefIsWorthZero) {
  const LightDark ld;
  const RolloutGuide<LightDark> guide(ld, 20);
  ParticleBelief<LightDarkState> b(std::vector<LightDarkState>(10, LightDarkState{0.0, true}));
  Rng rng(1);
  const auto est = guide.evaluate(b, rng);
  EXPECT_EQ(est.value, 0.0);
  EXPECT_NEAR(est.prior.sum(), 1.0, 1e-12);
}

TEST(Rollout, BaselinePlansDeterministically) {
  const LightDark ld;
  SearchConfig cfg;
  cfg.nOnline = 100;
  cfg.c = 100.0;
  const auto belief = lightDarkBelief(29);
  const auto a = rolloutBaselinePlan(ld, belief, cfg, 10, 30);
  EXPECT_EQ(a, rolloutBaselinePlan(ld, belief, cfg, 10, 30));
  EXPECT_GE(a, 0);
  EXPECT_LT(a, 3);
}

TEST(Rollout, UctTriesEveryWidenedActionFirst) {
  const ToyTree toy;
  const UniformZeroGuide guide;
  SearchConfig cfg;
  cfg.nOnline = 2;
  cfg.depth = 1;
  cfg.actionWidening = false;
  cfg.selection = SelectionRule::UCT;
  BeliefMcts<ToyTree, UniformZeroGuide> mcts(toy, guide, cfg);
  mcts.plan(ParticleBelief<ToyState>(std::vector<ToyState>(4, ToyState{0})), 1);
  for (const auto& edge : mcts.tree().edges) EXPECT_EQ(edge.visits, 1);
}

TEST(TreeDump, OneJsonObjectPerNodeAndEdge) {
  const LightDark ld;
  const auto net = randomNet(15);
  NetworkGuide<LightDark> guide(ld, net);
  SearchConfig cfg;
  cfg.nOnline = 50;
  BeliefMcts<LightDark, NetworkGuide<LightDark>> mcts(ld, guide, cfg);
  mcts.plan(lightDarkBelief(31), 32);
  std::ostringstream out;
  writeTreeJsonLines(out, mcts.tree());
  std::istringstream in(out.str());
  std::string line;
  std::size_t lines = 0;
  while (std::getline(in, line)) {
    EXPECT_TRUE(nlohmann::json::accept(line));
    ++lines;
  }
  EXPECT_EQ(lines, mcts.tree().nodes.size() + mcts.tree().edges.size());
}
