#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "cbc/coverage.hpp"
#include "cbc/oracles.hpp"
#include "support.hpp"

namespace cbc {
namespace {

using testing::make_graph;

CoverageInstance coverage(NodeWeightedDigraph g, std::vector<double> prizes,
                          std::vector<std::vector<ElementId>> sets, double budget,
                          bool directed = true) {
  CoverageInstance inst;
  inst.graph = std::move(g);
  inst.prizes = std::move(prizes);
  inst.sets = std::move(sets);
  inst.budget = budget;
  inst.directed = directed;
  return inst;
}

// Random instance with integer costs and prizes, each element on 1-3 nodes.
CoverageInstance random_coverage(std::mt19937_64& rng, std::size_t n, std::size_t m,
                                 bool directed) {
  CoverageInstance inst;
  if (directed) {
    inst.graph = testing::random_graph(rng, n, 0.15, 5);
  } else {
    auto core = testing::random_bidirected(rng, n, 0, 0.2, 5);
    inst.graph = std::move(core.graph);
  }
  inst.directed = directed;
  inst.sets.assign(n, {});
  for (std::size_t x = 0; x < m; ++x) {
    inst.prizes.push_back(static_cast<double>(1 + rng() % 5));
    std::size_t holders = 1 + rng() % 3;
    for (std::size_t k = 0; k < holders; ++k) {
      auto& s = inst.sets[rng() % n];
      if (std::find(s.begin(), s.end(), x) == s.end()) s.push_back(static_cast<ElementId>(x));
    }
  }
  double total = 0;
  for (NodeId v = 0; v < n; ++v) total += inst.graph.cost(v);
  inst.budget = std::max(inst.graph.cost(0), std::floor(0.3 * total));
  return inst;
}

TEST(AugmentGraph, Examples) {
  auto empty = coverage(make_graph({1, 2}, {{0, 1}}), {}, {{}, {}}, 3);
  auto a0 = augment_graph(empty);
  EXPECT_EQ(a0.graph.node_count(), 2u);
  EXPECT_EQ(a0.graph.arcs(), (std::vector<Arc>{{0, 1}}));

  auto one = coverage(NodeWeightedDigraph({4}), {7}, {{0}}, 4);
  auto a1 = augment_graph(one);
  EXPECT_EQ(a1.graph.node_count(), 2u);
  EXPECT_EQ(a1.element_node, (std::vector<NodeId>{1}));
  EXPECT_EQ(a1.graph.cost(1), 0.0);
  EXPECT_EQ(a1.node_prize[1], 7.0);
  EXPECT_TRUE(a1.graph.has_arc(0, 1));

  auto shared = coverage(make_graph({0, 1, 1}, {{0, 1}, {0, 2}}), {1}, {{0}, {0}, {0}}, 2);
  auto a3 = augment_graph(shared);
  EXPECT_EQ(a3.graph.in_neighbors(3).size(), 3u);
  EXPECT_TRUE(a3.graph.out_neighbors(3).empty());
}

TEST(AugmentGraph, UndirectedFlagsBaseArcsAsCore) {
  NodeWeightedDigraph g({0, 1});
  g.add_edge(0, 1);
  auto inst = coverage(std::move(g), {1, 1}, {{0}, {1}}, 1, false);
  auto aug = augment_graph(inst);
  EXPECT_TRUE(aug.graph.has_bidirected_core());
  EXPECT_TRUE(aug.graph.in_core(1));
  EXPECT_FALSE(aug.graph.in_core(2));
  EXPECT_TRUE(aug.graph.check_bidirected_core().empty());
}

TEST(Buckets, IndexExamples) {
  EXPECT_EQ(bucket_index(1.0), 1u);
  EXPECT_EQ(bucket_index(0.5), 2u);
  EXPECT_EQ(bucket_index(0.3), 2u);
  EXPECT_EQ(bucket_index(0.25), 3u);
  EXPECT_EQ(bucket_index(0.2), 3u);
}

// Builds a FracSolution whose element capacities are the given values.
FracSolution with_capacities(const AugmentedGraph& aug, std::vector<double> ys) {
  FracSolution s;
  s.capacity.assign(aug.graph.node_count(), 0.0);
  for (std::size_t x = 0; x < ys.size(); ++x) s.capacity[aug.element_node[x]] = ys[x];
  return s;
}

TEST(Buckets, SelectExamples) {
  std::vector<std::vector<ElementId>> sets{{0, 1, 2, 3}};
  auto inst = coverage(NodeWeightedDigraph({0}), {1, 1, 1, 1}, sets, 0);
  auto aug = augment_graph(inst);

  auto all_one = select_buckets(with_capacities(aug, {1, 1, 1, 1}), aug);
  ASSERT_EQ(all_one.bucket_count(), 1u);
  EXPECT_EQ(all_one.buckets[0].size(), 4u);
  EXPECT_EQ(all_one.high_index, 1u);  // floor(log2 log2 4) = 1
  EXPECT_EQ(all_one.high.size(), 4u);

  // 1/16 is the floor for |X| = 4; 0.9/16 falls below it.
  auto mixed = select_buckets(with_capacities(aug, {0.3, 1.0 / 16, 0.9 / 16, 0}), aug);
  EXPECT_EQ(mixed.retained, (std::vector<NodeId>{1, 2}));
  ASSERT_EQ(mixed.bucket_count(), 5u);
  EXPECT_EQ(mixed.buckets[1], (std::vector<NodeId>{1}));
  EXPECT_EQ(mixed.buckets[4], (std::vector<NodeId>{2}));
  EXPECT_TRUE(mixed.high.empty());
  EXPECT_DOUBLE_EQ(mixed.retained_mass, 0.3 + 1.0 / 16);
}

TEST(Buckets, SingleElementKeepsOnlyFullyServed) {
  auto inst = coverage(NodeWeightedDigraph({0}), {2}, {{0}}, 0);
  auto aug = augment_graph(inst);
  EXPECT_EQ(select_buckets(with_capacities(aug, {1}), aug).retained.size(), 1u);
  auto half = select_buckets(with_capacities(aug, {0.5}), aug);
  EXPECT_TRUE(half.retained.empty());
  EXPECT_EQ(half.high_index, 0u);
}

TEST(SteinerConnect, Examples) {
  // r=0 covers element 0 directly; path r -> a=1 -> b=2 covers 1 and 2.
  auto inst = coverage(make_graph({0, 1, 1}, {{0, 1}, {1, 2}}), {1, 1, 1, 1},
                       {{0}, {1}, {2}, {}}, 2);
  auto aug = augment_graph(inst);
  std::vector<NodeId> near{aug.element_node[0]};
  auto t1 = steiner_connect(near, aug, ConnectMode::kDirected, 2);
  EXPECT_EQ(t1.nodes, (std::vector<NodeId>{0, 3}));

  std::vector<NodeId> all{aug.element_node[0], aug.element_node[1], aug.element_node[2]};
  auto t2 = steiner_connect(all, aug, ConnectMode::kDirected, 2);
  EXPECT_EQ(t2.nodes, (std::vector<NodeId>{0, 1, 2, 3, 4, 5}));
  EXPECT_EQ(drop_element_nodes(t2, aug).nodes, (std::vector<NodeId>{0, 1, 2}));

  std::vector<NodeId> orphan{aug.element_node[3]};
  EXPECT_THROW(steiner_connect(orphan, aug, ConnectMode::kDirected, 2), InfeasibleError);
}

TEST(SteinerConnect, BidirectedMode) {
  NodeWeightedDigraph g({0, 2, 1});
  g.add_edge(0, 1);
  g.add_edge(0, 2);
  g.add_edge(1, 2);
  auto inst = coverage(std::move(g), {1}, {{}, {0}, {0}}, 3, false);
  auto aug = augment_graph(inst);
  std::vector<NodeId> terms{aug.element_node[0]};
  auto t = steiner_connect(terms, aug, ConnectMode::kBidirected, 3);
  EXPECT_EQ(t.nodes, (std::vector<NodeId>{0, 2, 3}));
}

PrizeFn prize_of(const CoverageInstance& inst) {
  return [&inst](std::span<const NodeId> nodes) { return inst.prize(nodes); };
}

TEST(TrimTree, UnchangedWithinBudget) {
  auto inst = coverage(make_graph({1, 1}, {{0, 1}}), {1}, {{}, {0}}, 2);
  OutTree t = spanning_out_tree(inst.graph, 0, {0, 1});
  EXPECT_EQ(trim_tree(t, 1.0, 2, inst.graph, 0, prize_of(inst)), t);
  EXPECT_EQ(trim_tree(t, 0.1, 1.9, inst.graph, 0, prize_of(inst)), t);
  EXPECT_THROW(trim_tree(t, 0.0, 2, inst.graph, 0, prize_of(inst)), ValidationError);
}

TEST(TrimTree, LongPathWithShortcuts) {
  // Unit path 0..7 plus arcs r -> v, so every node is within B=2 of r.
  NodeWeightedDigraph g(std::vector<double>(8, 1.0));
  CoverageInstance inst = coverage(g, std::vector<double>(8, 1.0), {}, 2);
  inst.sets.resize(8);
  for (NodeId v = 0; v < 8; ++v) inst.sets[v] = {v};
  for (NodeId v = 1; v < 8; ++v) {
    inst.graph.add_arc(v - 1, v);
    if (v > 1) inst.graph.add_arc(0, v);
  }
  std::vector<NodeId> all{0, 1, 2, 3, 4, 5, 6, 7};
  OutTree path = extract_out_tree(make_graph(std::vector<double>(8, 1.0),
                                     {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}, {5, 6}, {6, 7}}),
                          0, all);
  ASSERT_EQ(path.total_cost, 8.0);
  OutTree out = trim_tree(path, 1.0, 2, inst.graph, 0, prize_of(inst));
  EXPECT_TRUE(validate_out_tree(out, inst.graph, 0).empty());
  EXPECT_GE(out.total_cost, 1.0);
  EXPECT_LE(out.total_cost, 4.0);
  // Every node carries prize 1, so any kept tree has ratio 1 >= gamma/4.
  EXPECT_EQ(inst.prize(out.nodes), out.total_cost);
}

TEST(TrimTree, HeavyPrizeBranchSurvives) {
  // Branches 1-2-3 and 4-5-6 under a free root, shortcuts r -> every node.
  auto g = make_graph({0, 1, 1, 1, 1, 1, 1},
                      {{0, 1}, {1, 2}, {2, 3}, {0, 4}, {4, 5}, {5, 6}});
  for (NodeId v : {2, 3, 5, 6}) g.add_arc(0, v);
  auto inst = coverage(g, {10, 1}, {{}, {}, {}, {0}, {}, {}, {1}}, 2);
  OutTree t = extract_out_tree(make_graph({0, 1, 1, 1, 1, 1, 1},
                                          {{0, 1}, {1, 2}, {2, 3}, {0, 4}, {4, 5}, {5, 6}}),
                               0, std::vector<NodeId>{3, 6});
  OutTree out = trim_tree(t, 0.5, 2, inst.graph, 0, prize_of(inst));
  EXPECT_LE(out.total_cost, 3.0);
  EXPECT_TRUE(out.contains(3));
  EXPECT_GE(inst.prize(out.nodes), 10.0);
}

// Random out-tree of g grown from the root by random frontier arcs.
OutTree random_tree(std::mt19937_64& rng, const NodeWeightedDigraph& g, std::size_t size) {
  std::vector<bool> in(g.node_count(), false);
  in[0] = true;
  std::vector<Arc> arcs;
  std::vector<NodeId> nodes{0};
  while (nodes.size() < size) {
    std::vector<Arc> frontier;
    for (NodeId u : nodes) {
      for (NodeId v : g.out_neighbors(u)) {
        if (!in[v]) frontier.push_back({u, v});
      }
    }
    if (frontier.empty()) break;
    Arc a = frontier[rng() % frontier.size()];
    in[a.second] = true;
    nodes.push_back(a.second);
    arcs.push_back(a);
  }
  OutTree t;
  t.root = 0;
  std::sort(nodes.begin(), nodes.end());
  std::sort(arcs.begin(), arcs.end());
  t.nodes = nodes;
  t.arcs = arcs;
  t.total_cost = node_set_cost(g, nodes);
  return t;
}

TEST(TrimTree, ContractOnRandomTrees) {
  std::mt19937_64 rng(77);
  const double eps_choices[] = {0.25, 0.5, 1.0};
  int trimmed = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::size_t n = 6 + trial % 15;
    auto base = testing::random_graph(rng, n, 0.25, 9);
    CoverageInstance inst;
    inst.graph = base;
    inst.prizes.resize(n);
    inst.sets.assign(n, {});
    for (std::size_t x = 0; x < n; ++x) {
      inst.prizes[x] = static_cast<double>(rng() % 6);
      inst.sets[rng() % n].push_back(static_cast<ElementId>(x));
    }
    auto dm = shortest_paths(base, 0, EndpointMode::kIncludeBoth);
    double far = 0;
    for (NodeId v = 0; v < n; ++v) far = std::max(far, dm.dist[v]);
    double budget = std::max({1.0, base.cost(0), std::floor(far * (0.3 + 0.1 * (trial % 8)))});
    auto g = b_proper_prune(base, 0, budget);
    OutTree t = random_tree(rng, g, 2 + rng() % n);
    double eps = eps_choices[trial % 3];
    OutTree out = trim_tree(t, eps, budget, g, 0, prize_of(inst));
    ASSERT_TRUE(validate_out_tree(out, g, 0).empty()) << "trial " << trial;
    ASSERT_TRUE(out.contains(0));
    const double cap = (1 + eps) * budget;
    if (t.total_cost <= cap) {
      EXPECT_EQ(out, t);
      continue;
    }
    ++trimmed;
    EXPECT_GE(out.total_cost, eps * budget / 2) << "trial " << trial;
    EXPECT_LE(out.total_cost, cap) << "trial " << trial;
    // Integer data: p/c >= (eps/4) p(T)/c(T) checked exactly after scaling eps.
    double lhs = 4 * inst.prize(out.nodes) * t.total_cost * 4;
    double rhs = eps * 4 * inst.prize(t.nodes) * out.total_cost;
    EXPECT_GE(lhs, rhs) << "trial " << trial;
  }
  EXPECT_GT(trimmed, 200);
}

TEST(SolveDcbc, Examples) {
  auto zero = coverage(NodeWeightedDigraph({0}), {5}, {{0}}, 0);
  auto r0 = solve_dcbc(zero);
  EXPECT_EQ(r0.prize, 5.0);
  EXPECT_EQ(r0.cost, 0.0);

  auto path = coverage(make_graph({0, 1, 1}, {{0, 1}, {1, 2}}), {1, 1}, {{}, {0}, {1}}, 2);
  auto rp = solve_dcbc(path);
  EXPECT_EQ(rp.prize, 2.0);
  EXPECT_EQ(rp.prize, brute_force_dcbc(path).value);
  EXPECT_LE(rp.cost, 4.0);
  EXPECT_EQ(rp.covered, (std::vector<ElementId>{0, 1}));

  auto expensive_root = coverage(NodeWeightedDigraph({3}), {1}, {{0}}, 2);
  EXPECT_THROW(solve_dcbc(expensive_root), InfeasibleError);
  EXPECT_THROW(solve_dcbc(path, 0.0), ValidationError);
}

TEST(SolveDcbc, ReportIsConsistent) {
  std::mt19937_64 rng(101);
  for (int trial = 0; trial < 40; ++trial) {
    bool directed = trial % 2 == 0;
    auto inst = random_coverage(rng, 10, 6, directed);
    for (double eps : {0.25, 1.0}) {
      auto rep = directed ? solve_dcbc(inst, eps) : solve_ucbc(inst, eps);
      EXPECT_TRUE(validate_out_tree(rep.tree, inst.graph, 0).empty());
      EXPECT_LE(rep.cost, (1 + eps) * inst.budget);
      EXPECT_EQ(rep.cost, node_set_cost(inst.graph, rep.tree.nodes));
      EXPECT_EQ(rep.prize, inst.prize(rep.tree.nodes));
      EXPECT_EQ(rep.covered, inst.covered(rep.tree.nodes));
    }
  }
}

TEST(SolveDcbc, LpBoundsAndBucketProperties) {
  std::mt19937_64 rng(202);
  for (int trial = 0; trial < 40; ++trial) {
    bool directed = trial % 2 == 1;
    auto inst = random_coverage(rng, 9, 2 + trial % 7, directed);
    auto plan = plan_budgeted(inst, {directed ? ConnectMode::kDirected : ConnectMode::kBidirected, {}});
    double lp = plan.solution.objective;
    EXPECT_GE(lp, brute_force_dcbc(inst).value - 1e-6) << "trial " << trial;
    double x = static_cast<double>(inst.element_count());
    EXPECT_LE(plan.buckets.bucket_count(), 2 * std::ceil(std::log2(x)) + 1);
    EXPECT_GE(plan.buckets.retained_mass, (1 - 1 / x) * lp - 1e-6);
    // Buckets partition the retained set.
    std::vector<NodeId> joined;
    for (const auto& b : plan.buckets.buckets) joined.insert(joined.end(), b.begin(), b.end());
    std::sort(joined.begin(), joined.end());
    EXPECT_EQ(joined, plan.buckets.retained);
  }
}

TEST(Coverage, RemovingALeafNeverRaisesPrize) {
  std::mt19937_64 rng(303);
  for (int trial = 0; trial < 50; ++trial) {
    auto inst = random_coverage(rng, 10, 6, true);
    OutTree t = random_tree(rng, inst.graph, 2 + rng() % 9);
    double p = inst.prize(t.nodes);
    std::vector<std::size_t> out_degree(inst.graph.node_count(), 0);
    for (auto [u, v] : t.arcs) ++out_degree[u];
    for (NodeId leaf : t.nodes) {
      if (leaf == t.root || out_degree[leaf] != 0) continue;
      std::vector<NodeId> rest;
      for (NodeId v : t.nodes) {
        if (v != leaf) rest.push_back(v);
      }
      EXPECT_LE(inst.prize(rest), p);
    }
  }
}

}  // namespace
}  // namespace cbc
