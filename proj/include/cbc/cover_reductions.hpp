// Connected set cover and group Steiner tree, solved by repeated budgeted
// coverage under a guessed optimum, plus the reductions between them.
#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "cbc/coverage.hpp"
#include "cbc/dst.hpp"
#include "cbc/error.hpp"
#include "cbc/graph.hpp"
#include "cbc/instance.hpp"

namespace cbc {

/// One element per group; node v covers element i iff v lies in group i.
inline CoverageInstance gst_to_csc(const GroupInstance& inst) {
  inst.validate();
  CoverageInstance out;
  out.graph = inst.graph;
  out.root = inst.root;
  out.directed = inst.directed;
  out.prizes.assign(inst.groups.size(), 1.0);
  out.sets.assign(inst.graph.node_count(), {});
  for (std::size_t i = 0; i < inst.groups.size(); ++i) {
    for (NodeId v : inst.groups[i]) out.sets[v].push_back(static_cast<ElementId>(i));
  }
  for (auto& s : out.sets) {
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
  }
  return out;
}

/// One group per element holding every node whose set contains it.
inline GroupInstance csc_to_gst(const CoverageInstance& inst) {
  inst.validate();
  GroupInstance out;
  out.graph = inst.graph;
  out.root = inst.root;
  out.directed = inst.directed;
  out.groups.assign(inst.element_count(), {});
  for (NodeId v = 0; v < inst.sets.size(); ++v) {
    for (ElementId x : inst.sets[v]) out.groups[x].push_back(v);
  }
  for (std::size_t x = 0; x < out.groups.size(); ++x) {
    auto& g = out.groups[x];
    if (g.empty()) {
      throw InfeasibleError("element " + std::to_string(x) + " belongs to no node's set");
    }
    std::sort(g.begin(), g.end());
    g.erase(std::unique(g.begin(), g.end()), g.end());
  }
  return out;
}

struct WeightedEdge {
  NodeId u = 0;
  NodeId v = 0;
  double cost = 0.0;
};

struct EdgeWeightedGraph {
  std::size_t node_count = 0;
  std::vector<WeightedEdge> edges;
  bool directed = false;
};

/// Replaces each edge by a middle node carrying its cost; original nodes
/// cost 0. Middle node of edge i is node_count + i.
inline NodeWeightedDigraph split_edge_weights(const EdgeWeightedGraph& g) {
  std::vector<double> costs(g.node_count + g.edges.size(), 0.0);
  for (std::size_t i = 0; i < g.edges.size(); ++i) {
    const auto& e = g.edges[i];
    if (!(e.cost >= 0.0)) {
      throw ValidationError("edge " + std::to_string(i) + " has a negative cost");
    }
    if (e.u >= g.node_count || e.v >= g.node_count) {
      throw ValidationError("edge " + std::to_string(i) + " references an unknown node");
    }
    costs[g.node_count + i] = e.cost;
  }
  NodeWeightedDigraph out(std::move(costs));
  for (std::size_t i = 0; i < g.edges.size(); ++i) {
    const auto& e = g.edges[i];
    auto mid = static_cast<NodeId>(g.node_count + i);
    out.add_arc(e.u, mid);
    out.add_arc(mid, e.v);
    if (!g.directed) {
      out.add_arc(e.v, mid);
      out.add_arc(mid, e.u);
    }
  }
  return out;
}

struct CscIteration {
  std::size_t uncovered_before = 0;
  std::size_t newly_covered = 0;
  double tree_cost = 0.0;       // under the zeroed costs of that iteration
  std::size_t zeroed_nodes = 0;  // cumulative after the iteration
};

struct IterationTrace {
  double guess = 0.0;
  bool accepted = false;
  std::string reason;  // why a guess was rejected
  std::vector<CscIteration> iterations;
  std::vector<NodeId> union_nodes;
};

struct CscOptions {
  double epsilon_guess = 1.0;
  double cap_factor = 4.0;  // iteration cap = cap_factor (log2|X| + 1)^3
};

struct CscReport {
  OutTree tree;
  double guess = 0.0;
  IterationTrace trace;                // at the returned guess
  std::vector<IterationTrace> tried;   // every guess evaluated, in order
  std::size_t iteration_cap = 0;
};

inline std::size_t csc_iteration_cap(std::size_t elements, double factor) {
  double l = std::log2(std::max<double>(static_cast<double>(elements), 1.0)) + 1.0;
  return static_cast<std::size_t>(std::ceil(factor * l * l * l));
}

namespace detail {

inline IterationTrace run_cover_loop(const CoverageInstance& inst, double guess,
                                     std::size_t cap) {
  IterationTrace tr;
  tr.guess = guess;
  const std::size_t m = inst.element_count();
  std::vector<bool> covered(m, false);
  std::size_t remaining = m;
  std::vector<bool> used(inst.graph.node_count(), false);
  const ConnectMode mode = inst.directed ? ConnectMode::kDirected : ConnectMode::kBidirected;
  std::vector<NodeId> zeroed;
  auto mark = [&](NodeId v) {
    if (used[v]) return;
    used[v] = true;
    zeroed.push_back(v);
    for (ElementId x : inst.sets[v]) {
      if (!covered[x]) {
        covered[x] = true;
        --remaining;
      }
    }
  };
  if (inst.graph.cost(inst.root) > guess) {
    tr.reason = "root cost exceeds the guess";
    return tr;
  }
  mark(inst.root);
  while (remaining > 0) {
    if (tr.iterations.size() >= cap) {
      tr.reason = "iteration cap reached";
      return tr;
    }
    CoverageInstance sub;
    sub.graph = inst.graph;
    for (NodeId v : zeroed) sub.graph.set_cost(v, 0.0);
    sub.root = inst.root;
    sub.budget = guess;
    sub.directed = inst.directed;
    std::vector<ElementId> remap(m, 0);
    for (std::size_t x = 0; x < m; ++x) {
      if (covered[x]) continue;
      remap[x] = static_cast<ElementId>(sub.prizes.size());
      sub.prizes.push_back(1.0);
    }
    sub.sets.assign(inst.graph.node_count(), {});
    for (NodeId v = 0; v < inst.sets.size(); ++v) {
      for (ElementId x : inst.sets[v]) {
        if (!covered[x]) sub.sets[v].push_back(remap[x]);
      }
    }
    BudgetedOptions opt;
    opt.mode = mode;
    opt.forced_nodes = zeroed;
    RunReport rep = finish_budgeted(plan_budgeted(sub, opt), 1.0);
    CscIteration it;
    it.uncovered_before = remaining;
    it.tree_cost = rep.cost;
    for (NodeId v : rep.tree.nodes) mark(v);
    it.newly_covered = it.uncovered_before - remaining;
    it.zeroed_nodes = zeroed.size();
    tr.iterations.push_back(it);
    if (it.newly_covered == 0) {
      tr.reason = "an iteration covered no new element";
      return tr;
    }
  }
  tr.accepted = true;
  tr.union_nodes = zeroed;
  std::sort(tr.union_nodes.begin(), tr.union_nodes.end());
  return tr;
}

}  // namespace detail

/// Tree from the root covering every element. Guesses come from a geometric
/// ladder (plus 0 for free roots); the smallest accepted guess found by
/// binary search is returned.
inline CscReport solve_csc(const CoverageInstance& inst, const CscOptions& opt = {}) {
  inst.validate();
  if (!(opt.epsilon_guess > 0.0)) throw ValidationError("epsilon_guess must be positive");
  const auto& g = inst.graph;
  auto reach = reachable_from(g, inst.root);
  std::vector<bool> coverable(inst.element_count(), false);
  double total = 0.0, cheapest = kInfinity;
  for (NodeId v : g.nodes()) {
    if (!reach[v]) continue;
    total += g.cost(v);
    if (g.cost(v) > 0.0) cheapest = std::min(cheapest, g.cost(v));
    for (ElementId x : inst.sets[v]) coverable[x] = true;
  }
  for (std::size_t x = 0; x < coverable.size(); ++x) {
    if (!coverable[x]) {
      throw InfeasibleError("element " + std::to_string(x) +
                            " is not covered by any node reachable from the root");
    }
  }
  std::vector<double> ladder{0.0};
  if (total > 0.0) {
    double lo = std::max(g.cost(inst.root), cheapest);
    auto rest = guess_opt_schedule(lo, total, opt.epsilon_guess);
    ladder.insert(ladder.end(), rest.begin(), rest.end());
  }
  CscReport rep;
  rep.iteration_cap = csc_iteration_cap(inst.element_count(), opt.cap_factor);
  std::vector<std::optional<IterationTrace>> seen(ladder.size());
  auto evaluate = [&](std::size_t i) -> const IterationTrace& {
    if (!seen[i]) {
      seen[i] = detail::run_cover_loop(inst, ladder[i], rep.iteration_cap);
      rep.tried.push_back(*seen[i]);
    }
    return *seen[i];
  };
  std::size_t hi = ladder.size() - 1;
  if (!evaluate(hi).accepted) {
    throw SolverError("every guess failed; largest guess " + std::to_string(ladder[hi]) +
                      ": " + seen[hi]->reason);
  }
  std::size_t lo = 0;
  while (lo < hi) {
    std::size_t mid = lo + (hi - lo) / 2;
    if (evaluate(mid).accepted) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  rep.trace = *seen[hi];
  rep.guess = ladder[hi];
  rep.tree = spanning_out_tree(g, inst.root, rep.trace.union_nodes);
  return rep;
}

/// Tree from the root touching every group.
inline CscReport solve_gst(const GroupInstance& inst, const CscOptions& opt = {}) {
  return solve_csc(gst_to_csc(inst), opt);
}

}  // namespace cbc
