// Exact reference solvers for small instances. They enumerate node subsets
// (or simple paths) directly and favour obviousness over speed.
#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "cbc/error.hpp"
#include "cbc/graph.hpp"
#include "cbc/instance.hpp"
#include "cbc/relaxation.hpp"
#include "cbc/simplex.hpp"

namespace cbc {

inline constexpr std::size_t kDefaultOracleCap = 16;
inline constexpr std::size_t kPathOracleCap = 8;

struct OracleResult {
  OutTree tree;
  double value = 0.0;  // prize for coverage, cost for Steiner and set cover
};

namespace detail {

inline void check_cap(const NodeWeightedDigraph& g, std::size_t cap,
                      const char* who) {
  if (g.node_count() > cap || cap > 30) {
    throw ValidationError(std::string(who) + ": " + std::to_string(g.node_count()) +
                          " nodes exceed the enumeration cap " + std::to_string(cap));
  }
}

// True when every node of mask is reachable from root using arcs inside mask.
inline bool spans_from_root(const NodeWeightedDigraph& g, NodeId root,
                            std::uint32_t mask) {
  std::uint32_t seen = 1u << root;
  std::vector<NodeId> stack{root};
  while (!stack.empty()) {
    NodeId u = stack.back();
    stack.pop_back();
    for (NodeId w : g.out_neighbors(u)) {
      std::uint32_t bit = 1u << w;
      if ((mask & bit) && !(seen & bit)) {
        seen |= bit;
        stack.push_back(w);
      }
    }
  }
  return seen == mask;
}

inline std::vector<NodeId> mask_nodes(std::uint32_t mask, std::size_t n) {
  std::vector<NodeId> out;
  for (NodeId v = 0; v < n; ++v) {
    if (mask & (1u << v)) out.push_back(v);
  }
  return out;
}

// Calls visit(mask) for every subset of active nodes containing all of
// required, in increasing order of the free-node bit pattern.
inline void for_each_subset(const NodeWeightedDigraph& g, std::uint32_t required,
                            const std::function<void(std::uint32_t)>& visit) {
  std::vector<NodeId> free;
  for (NodeId v : g.nodes()) {
    if (!(required & (1u << v))) free.push_back(v);
  }
  const std::uint64_t total = std::uint64_t{1} << free.size();
  for (std::uint64_t bits = 0; bits < total; ++bits) {
    std::uint32_t mask = required;
    for (std::size_t i = 0; i < free.size(); ++i) {
      if (bits & (std::uint64_t{1} << i)) mask |= 1u << free[i];
    }
    visit(mask);
  }
}

}  // namespace detail

/// Maximum-prize out-tree from the root within the budget.
inline OracleResult brute_force_dcbc(const CoverageInstance& inst,
                                     std::size_t cap = kDefaultOracleCap) {
  inst.validate();
  const auto& g = inst.graph;
  detail::check_cap(g, cap, "brute_force_dcbc");
  if (g.cost(inst.root) > inst.budget) {
    throw InfeasibleError("root cost exceeds the budget");
  }
  const std::size_t n = g.node_count();
  std::uint32_t best_mask = 1u << inst.root;
  double best_prize = -1.0, best_cost = 0.0;
  detail::for_each_subset(g, 1u << inst.root, [&](std::uint32_t mask) {
    auto nodes = detail::mask_nodes(mask, n);
    double cost = node_set_cost(g, nodes);
    if (cost > inst.budget) return;
    if (!detail::spans_from_root(g, inst.root, mask)) return;
    double prize = inst.prize(nodes);
    if (prize > best_prize || (prize == best_prize && cost < best_cost)) {
      best_prize = prize;
      best_cost = cost;
      best_mask = mask;
    }
  });
  OracleResult r;
  r.tree = spanning_out_tree(g, inst.root, detail::mask_nodes(best_mask, n));
  r.value = best_prize;
  return r;
}

/// Minimum-cost out-tree from the root spanning every terminal.
inline OracleResult brute_force_dst(const SteinerInstance& inst,
                                    std::size_t cap = kDefaultOracleCap) {
  inst.validate();
  const auto& g = inst.graph;
  detail::check_cap(g, cap, "brute_force_dst");
  const std::size_t n = g.node_count();
  std::uint32_t required = 1u << inst.root;
  for (NodeId t : inst.terminals) required |= 1u << t;
  bool found = false;
  std::uint32_t best_mask = 0;
  double best_cost = kInfinity;
  detail::for_each_subset(g, required, [&](std::uint32_t mask) {
    auto nodes = detail::mask_nodes(mask, n);
    double cost = node_set_cost(g, nodes);
    if (cost >= best_cost) return;
    if (!detail::spans_from_root(g, inst.root, mask)) return;
    found = true;
    best_cost = cost;
    best_mask = mask;
  });
  if (!found) throw InfeasibleError("brute_force_dst: no tree spans the terminals");
  OracleResult r;
  r.tree = spanning_out_tree(g, inst.root, detail::mask_nodes(best_mask, n));
  r.value = best_cost;
  return r;
}

/// Minimum-cost out-tree from the root whose nodes cover every element.
inline OracleResult brute_force_csc(const CoverageInstance& inst,
                                    std::size_t cap = kDefaultOracleCap) {
  inst.validate();
  const auto& g = inst.graph;
  detail::check_cap(g, cap, "brute_force_csc");
  const std::size_t n = g.node_count();
  bool found = false;
  std::uint32_t best_mask = 0;
  double best_cost = kInfinity;
  detail::for_each_subset(g, 1u << inst.root, [&](std::uint32_t mask) {
    auto nodes = detail::mask_nodes(mask, n);
    double cost = node_set_cost(g, nodes);
    if (cost >= best_cost) return;
    if (inst.covered(nodes).size() != inst.element_count()) return;
    if (!detail::spans_from_root(g, inst.root, mask)) return;
    found = true;
    best_cost = cost;
    best_mask = mask;
  });
  if (!found) throw InfeasibleError("brute_force_csc: the elements cannot all be covered");
  OracleResult r;
  r.tree = spanning_out_tree(g, inst.root, detail::mask_nodes(best_mask, n));
  r.value = best_cost;
  return r;
}

namespace detail {

inline std::vector<std::vector<NodeId>> simple_paths(const NodeWeightedDigraph& g,
                                                     NodeId from, NodeId to) {
  std::vector<std::vector<NodeId>> out;
  std::vector<bool> on(g.node_count(), false);
  std::vector<NodeId> path;
  std::function<void(NodeId)> walk = [&](NodeId u) {
    on[u] = true;
    path.push_back(u);
    if (u == to) {
      out.push_back(path);
    } else {
      for (NodeId w : g.out_neighbors(u)) {
        if (!on[w]) walk(w);
      }
    }
    path.pop_back();
    on[u] = false;
  };
  walk(from);
  return out;
}

}  // namespace detail

/// Coverage LP in its literal path form: one flow column per simple root
/// path, capacity constraints per (target, node) pair. Returns the optimum.
inline double path_lp_oracle_dcbc(const NodeWeightedDigraph& g, NodeId root,
                                  std::span<const double> node_prize, double budget,
                                  std::size_t cap = kPathOracleCap) {
  detail::check_cap(g, cap, "path_lp_oracle");
  const std::size_t n = g.node_count();
  auto from_root = reachable_from(g, root);
  lp::LpProblem p;
  p.objective = lp::Objective::kMaximize;
  std::vector<std::int64_t> y(n, -1);
  std::vector<lp::Term> budget_row;
  for (NodeId v : g.nodes()) {
    if (!from_root[v] || v == root) continue;
    y[v] = static_cast<std::int64_t>(
        p.add_variable("y" + std::to_string(v), 0, 1, node_prize[v]));
    budget_row.push_back({static_cast<std::size_t>(y[v]), g.cost(v)});
  }
  p.add_row("budget", budget_row, lp::Sense::kLessEqual, budget - g.cost(root));
  for (NodeId v : g.nodes()) {
    if (y[v] < 0) continue;
    auto paths = detail::simple_paths(g, root, v);
    std::vector<lp::Term> total;
    std::vector<std::vector<lp::Term>> through(n);
    for (std::size_t i = 0; i < paths.size(); ++i) {
      auto col = p.add_variable("f", 0, 1, 0);
      total.push_back({col, 1});
      for (NodeId z : paths[i]) through[z].push_back({col, 1});
    }
    total.push_back({static_cast<std::size_t>(y[v]), -1});
    p.add_row("flow", total, lp::Sense::kEqual, 0);
    for (NodeId z : g.nodes()) {
      if (y[z] < 0 || through[z].empty()) continue;
      auto row = through[z];
      row.push_back({static_cast<std::size_t>(y[z]), -1});
      p.add_row("cap", row, lp::Sense::kLessEqual, 0);
    }
  }
  auto r = lp::solve(p);
  if (r.status != lp::Status::kOptimal) {
    throw SolverError(std::string("path_lp_oracle: ") + lp::to_string(r.status));
  }
  return r.objective;
}

/// Steiner LP in its literal path form.
inline double path_lp_oracle_dst(const SteinerInstance& inst,
                                 std::size_t cap = kPathOracleCap) {
  inst.validate();
  const auto& g = inst.graph;
  detail::check_cap(g, cap, "path_lp_oracle");
  const std::size_t n = g.node_count();
  auto from_root = reachable_from(g, inst.root);
  lp::LpProblem p;
  p.objective = lp::Objective::kMinimize;
  std::vector<std::int64_t> x(n, -1);
  for (NodeId v : g.nodes()) {
    if (!from_root[v]) continue;
    double lower = v == inst.root ? 1.0 : 0.0;
    x[v] = static_cast<std::int64_t>(
        p.add_variable("x" + std::to_string(v), lower, 1, g.cost(v)));
  }
  for (NodeId t : inst.terminals) {
    if (!from_root[t]) throw InfeasibleError("path_lp_oracle: unreachable terminal");
    if (t == inst.root) continue;
    auto paths = detail::simple_paths(g, inst.root, t);
    std::vector<lp::Term> total;
    std::vector<std::vector<lp::Term>> through(n);
    for (std::size_t i = 0; i < paths.size(); ++i) {
      auto col = p.add_variable("g", 0, 1, 0);
      total.push_back({col, 1});
      for (NodeId z : paths[i]) through[z].push_back({col, 1});
    }
    p.add_row("flow", total, lp::Sense::kEqual, 1);
    for (NodeId z : g.nodes()) {
      if (x[z] < 0 || through[z].empty()) continue;
      auto row = through[z];
      row.push_back({static_cast<std::size_t>(x[z]), -1});
      p.add_row("cap", row, lp::Sense::kLessEqual, 0);
    }
  }
  auto r = lp::solve(p);
  if (r.status != lp::Status::kOptimal) {
    throw SolverError(std::string("path_lp_oracle: ") + lp::to_string(r.status));
  }
  return r.objective;
}

}  // namespace cbc
