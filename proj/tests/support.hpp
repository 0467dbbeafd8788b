// Small builders shared by the test binaries.
#pragma once

#include <algorithm>
#include <initializer_list>
#include <random>
#include <utility>
#include <vector>

#include "cbc/graph.hpp"
#include "cbc/instance.hpp"

namespace cbc::testing {

inline NodeWeightedDigraph make_graph(std::vector<double> costs,
                                      std::initializer_list<Arc> arcs) {
  NodeWeightedDigraph g(std::move(costs));
  for (auto [u, v] : arcs) g.add_arc(u, v);
  return g;
}

// Random digraph with a backbone from node 0 and small integer costs.
inline NodeWeightedDigraph random_graph(std::mt19937_64& rng, std::size_t n,
                                        double density, int max_cost) {
  std::uniform_int_distribution<int> cost(0, max_cost);
  std::vector<double> costs(n);
  for (auto& c : costs) c = cost(rng);
  NodeWeightedDigraph g(costs);
  std::bernoulli_distribution extra(density);
  for (NodeId v = 1; v < n; ++v) {
    std::uniform_int_distribution<NodeId> pick(0, v - 1);
    g.add_arc(pick(rng), v);
  }
  for (NodeId u = 0; u < n; ++u) {
    for (NodeId v = 0; v < n; ++v) {
      if (u != v && !g.has_arc(u, v) && extra(rng)) g.add_arc(u, v);
    }
  }
  return g;
}

// Random Steiner instance on a random digraph; terminals avoid the root.
inline SteinerInstance random_steiner(std::mt19937_64& rng, std::size_t n,
                                      std::size_t terminals, double density,
                                      int max_cost) {
  SteinerInstance inst;
  inst.graph = random_graph(rng, n, density, max_cost);
  inst.root = 0;
  std::vector<NodeId> pool;
  for (NodeId v = 1; v < n; ++v) pool.push_back(v);
  std::shuffle(pool.begin(), pool.end(), rng);
  inst.terminals.assign(pool.begin(), pool.begin() + std::min(terminals, pool.size()));
  std::sort(inst.terminals.begin(), inst.terminals.end());
  return inst;
}

// Bidirected core on nodes [0, core) with a random spanning tree plus extra
// edges; terminals [core, core + terminals) each get 1-2 incoming arcs.
inline SteinerInstance random_bidirected(std::mt19937_64& rng, std::size_t core,
                                         std::size_t terminals, double density,
                                         int max_cost) {
  std::uniform_int_distribution<int> cost(0, max_cost);
  std::vector<double> costs(core + terminals);
  for (auto& c : costs) c = cost(rng);
  NodeWeightedDigraph g(costs);
  std::bernoulli_distribution extra(density);
  for (NodeId v = 1; v < core; ++v) {
    std::uniform_int_distribution<NodeId> pick(0, v - 1);
    g.add_edge(pick(rng), v);
  }
  for (NodeId u = 0; u < core; ++u) {
    for (NodeId v = u + 1; v < core; ++v) {
      if (!g.has_arc(u, v) && extra(rng)) g.add_edge(u, v);
    }
  }
  std::uniform_int_distribution<NodeId> pick(0, static_cast<NodeId>(core - 1));
  SteinerInstance inst;
  for (std::size_t i = 0; i < terminals; ++i) {
    NodeId t = static_cast<NodeId>(core + i);
    int in = 1 + static_cast<int>(rng() % 2);
    for (int k = 0; k < in; ++k) {
      NodeId u = pick(rng);
      if (!g.has_arc(u, t)) g.add_arc(u, t);
    }
    inst.terminals.push_back(t);
  }
  std::vector<bool> core_mask(core + terminals, false);
  for (std::size_t v = 0; v < core; ++v) core_mask[v] = true;
  g.set_bidirected_core(core_mask);
  inst.graph = std::move(g);
  inst.root = 0;
  return inst;
}

}  // namespace cbc::testing
