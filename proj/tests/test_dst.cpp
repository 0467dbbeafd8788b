#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "cbc/dst.hpp"
#include "cbc/oracles.hpp"
#include "support.hpp"

namespace cbc {
namespace {

using testing::make_graph;

TEST(GuessSchedule, Examples) {
  EXPECT_EQ(guess_opt_schedule(1, 8, 1), (std::vector<double>{1, 2, 4, 8}));
  EXPECT_EQ(guess_opt_schedule(3, 3, 0.5), (std::vector<double>{3}));
  EXPECT_EQ(guess_opt_schedule(1, 10, 1), (std::vector<double>{1, 2, 4, 8, 16}));
  EXPECT_THROW(guess_opt_schedule(0, 10, 1), ValidationError);
  EXPECT_THROW(guess_opt_schedule(1, 10, 0), ValidationError);
}

TEST(GuessSchedule, LengthBound) {
  for (double eps : {0.1, 0.5, 1.0, 2.0}) {
    for (double top : {1.0, 7.0, 100.0, 12345.0}) {
      auto ladder = guess_opt_schedule(1.0, top, eps);
      EXPECT_GE(ladder.back(), top);
      EXPECT_LT(static_cast<double>(ladder.size()),
                std::log(top) / std::log(1 + eps) + 2);
    }
  }
}

// r=0, relays a=1 and b=2, terminal t=3.
SteinerInstance two_relays() {
  SteinerInstance inst;
  inst.graph = make_graph({0, 1, 1, 0}, {{0, 1}, {0, 2}, {1, 3}, {2, 3}});
  inst.terminals = {3};
  return inst;
}

// Half a unit through each relay.
FracSolution split_flow(const SteinerInstance& inst, const FlowLp& f) {
  std::vector<double> x(f.problem.variables.size(), 0.0);
  auto cap = [&](NodeId v, double val) {
    x[static_cast<std::size_t>(f.capacity_var[v])] = val;
  };
  cap(0, 1);
  cap(1, 0.5);
  cap(2, 0.5);
  cap(3, 1);
  for (const auto& [arc, var] : f.commodities[0].arcs) x[var] = 0.5;
  (void)inst;
  return make_solution(f, x);
}

TEST(SplitTerminals, IntegralSolutionHasNoExpensiveTerminal) {
  auto inst = two_relays();
  auto f = build_dst_lp(inst);
  auto s = solve_lp(f);
  auto split = split_terminals(s, inst);
  EXPECT_TRUE(split.expensive.empty());
  EXPECT_EQ(split.cheap, (std::vector<NodeId>{3}));
  EXPECT_NEAR(split.threshold, 1 / std::sqrt(3.0), 1e-12);
}

TEST(SplitTerminals, BottleneckMakesTerminalExpensive) {
  auto inst = two_relays();
  auto f = build_dst_lp(inst);
  auto s = split_flow(inst, f);
  ASSERT_TRUE(check_lp_feasible(s, f).empty());
  auto split = split_terminals(s, inst);
  EXPECT_EQ(split.expensive, (std::vector<NodeId>{3}));
  auto sets = candidate_sets(s, inst, split);
  EXPECT_EQ(sets.at(3), (std::vector<NodeId>{1, 2}));
}

TEST(SplitTerminals, SingleNonTerminalGivesThresholdOne) {
  SteinerInstance inst;
  inst.graph = make_graph({1, 0}, {{0, 1}});
  inst.terminals = {1};
  auto s = solve_lp(build_dst_lp(inst));
  EXPECT_EQ(split_terminals(s, inst).threshold, 1.0);
}

TEST(CandidateSets, FanOfRelays) {
  // r -> w_i -> t for four relays carrying a quarter each.
  SteinerInstance inst;
  inst.graph = NodeWeightedDigraph({0, 1, 1, 1, 1, 0});
  for (NodeId w = 1; w <= 4; ++w) {
    inst.graph.add_arc(0, w);
    inst.graph.add_arc(w, 5);
  }
  inst.terminals = {5};
  auto f = build_dst_lp(inst);
  std::vector<double> x(f.problem.variables.size(), 0.0);
  for (NodeId v = 0; v <= 5; ++v) {
    x[static_cast<std::size_t>(f.capacity_var[v])] = (v == 0 || v == 5) ? 1 : 0.25;
  }
  for (const auto& [arc, var] : f.commodities[0].arcs) x[var] = 0.25;
  auto s = make_solution(f, x);
  ASSERT_TRUE(check_lp_feasible(s, f).empty());
  auto split = split_terminals(s, inst);
  auto sets = candidate_sets(s, inst, split);
  EXPECT_EQ(sets.at(5), (std::vector<NodeId>{1, 2, 3, 4}));

  split.expensive.clear();
  EXPECT_TRUE(candidate_sets(s, inst, split).empty());
}

TEST(HittingSet, Examples) {
  EXPECT_EQ(greedy_hitting_set({{1, 2}, {2, 3}, {3, 4}}), (std::vector<NodeId>{2, 3}));
  EXPECT_EQ(greedy_hitting_set({{4}, {2}, {9}}), (std::vector<NodeId>{2, 4, 9}));
  EXPECT_EQ(greedy_hitting_set({{5, 7}, {5, 7}, {5, 7}}), (std::vector<NodeId>{5}));
  EXPECT_THROW(greedy_hitting_set({{1}, {}}), ValidationError);
}

TEST(HittingSet, HitsEverySetWithinHarmonicBound) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    std::size_t m = 3 + trial % 12, count = 1 + trial % 9;
    std::vector<std::vector<NodeId>> sets(count);
    for (auto& s : sets) {
      for (NodeId e = 0; e < m; ++e) {
        if (rng() % 3 == 0) s.push_back(e);
      }
      if (s.empty()) s.push_back(static_cast<NodeId>(rng() % m));
    }
    std::size_t L = m;
    for (auto& s : sets) L = std::min(L, s.size());
    auto hs = greedy_hitting_set(sets);
    for (auto& s : sets) {
      bool hit = false;
      for (NodeId e : s) hit |= std::binary_search(hs.begin(), hs.end(), e);
      EXPECT_TRUE(hit);
    }
    double harmonic = 0;
    for (std::size_t i = 1; i <= count; ++i) harmonic += 1.0 / i;
    EXPECT_LE(hs.size(), harmonic * m / L + 1e-9);
  }
}

TEST(SolveDst, PathAndStar) {
  SteinerInstance path;
  path.graph = make_graph({1, 2, 3}, {{0, 1}, {1, 2}});
  path.terminals = {2};
  auto rep = solve_dst(path);
  EXPECT_EQ(rep.tree.nodes, (std::vector<NodeId>{0, 1, 2}));
  EXPECT_EQ(rep.tree.total_cost, 6.0);

  SteinerInstance star;
  star.graph = make_graph({1, 1, 1, 1, 5}, {{0, 1}, {0, 2}, {0, 3}, {1, 4}, {4, 2}});
  star.terminals = {1, 2, 3};
  auto srep = solve_dst(star);
  EXPECT_EQ(srep.tree.arcs, (std::vector<Arc>{{0, 1}, {0, 2}, {0, 3}}));
}

TEST(SolveDst, UnreachableTerminal) {
  SteinerInstance inst;
  inst.graph = make_graph({0, 0, 0}, {{0, 1}});
  inst.terminals = {2};
  EXPECT_THROW(solve_dst(inst), InfeasibleError);
}

TEST(SolveDst, FixedCapSkipsGuessing) {
  auto inst = two_relays();
  DstOptions opt;
  opt.f_cap = 5.0;
  auto rep = solve_dst(inst, opt);
  EXPECT_EQ(rep.guesses, 0u);
  EXPECT_EQ(rep.max_distance, 5.0);
  EXPECT_EQ(rep.tree.total_cost, 1.0);
}

TEST(SolveDst, RandomInstancesAgainstOracle) {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 30; ++trial) {
    auto inst = testing::random_steiner(rng, 12, 3, 0.12, 9);
    auto rep = solve_dst(inst);
    EXPECT_TRUE(validate_out_tree(rep.tree, inst.graph, 0).empty());
    for (NodeId t : inst.terminals) EXPECT_TRUE(rep.tree.contains(t));
    auto opt = brute_force_dst(inst);
    EXPECT_GE(rep.tree.total_cost, opt.value);
    EXPECT_LE(rep.lp_opt, opt.value + kLpObjectiveTol);
    double n = std::max<double>(non_terminal_count(inst), 1);
    double bound = std::sqrt(n) * (2 * rep.lp_opt +
                                   rep.max_distance * (std::log(std::max(3.0, 2.0)) + 1));
    EXPECT_LE(rep.tree.total_cost, bound + 1e-9);
  }
}

}  // namespace
}  // namespace cbc
