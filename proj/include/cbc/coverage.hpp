// Connected budgeted maximum coverage, directed (DCBC) and undirected (UCBC).
//
// Pipeline: prune to nodes within budget distance of the root, append one
// sink per element, solve the flow LP, bucket element sinks by their LP
// capacity, connect each bucket (and the union of the high buckets) with a
// Steiner tree, trim every candidate to (1+eps)B and keep the best prize.
#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cbc/dst.hpp"
#include "cbc/dst_bidirected.hpp"
#include "cbc/error.hpp"
#include "cbc/graph.hpp"
#include "cbc/instance.hpp"
#include "cbc/relaxation.hpp"

namespace cbc {

inline AugmentedGraph augment_graph(const CoverageInstance& inst) {
  const auto& g = inst.graph;
  const std::size_t n = g.node_count(), m = inst.element_count();
  std::vector<double> costs(g.costs().begin(), g.costs().end());
  costs.resize(n + m, 0.0);
  NodeWeightedDigraph full(std::move(costs));
  for (auto [u, v] : g.arcs()) full.add_arc(u, v);
  for (NodeId v = 0; v < n; ++v) {
    if (!g.contains(v)) continue;
    std::vector<ElementId> xs = inst.sets[v];
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    for (ElementId x : xs) full.add_arc(v, static_cast<NodeId>(n + x));
  }
  std::vector<bool> keep(n + m, true);
  for (NodeId v = 0; v < n; ++v) keep[v] = g.contains(v);
  AugmentedGraph aug;
  aug.graph = full.induced(keep);
  if (!inst.directed) {
    std::vector<bool> core(n + m, false);
    for (NodeId v = 0; v < n; ++v) core[v] = true;
    aug.graph.set_bidirected_core(core);
  }
  aug.root = inst.root;
  aug.base_count = n;
  aug.node_prize.assign(n + m, 0.0);
  for (std::size_t x = 0; x < m; ++x) {
    aug.node_prize[n + x] = inst.prizes[x];
    aug.element_node.push_back(static_cast<NodeId>(n + x));
  }
  return aug;
}

struct BucketStructure {
  std::size_t ground_size = 0;            // |X|
  std::vector<NodeId> retained;           // Z: capacity at least 1/|X|^2
  std::vector<std::vector<NodeId>> buckets;  // buckets[i-1] = Z_i
  std::size_t high_index = 0;             // Z_A = buckets 1..high_index
  std::vector<NodeId> high;               // Z_A
  double retained_mass = 0.0;             // sum over Z of y_w p_w

  std::size_t bucket_count() const { return buckets.size(); }
};

/// Index i with y in (2^-i, 2^-(i-1)]; y must be positive.
inline std::size_t bucket_index(double y) {
  std::size_t i = 1;
  while (y <= std::ldexp(1.0, -static_cast<int>(i))) ++i;
  return i;
}

inline BucketStructure select_buckets(const FracSolution& s, const AugmentedGraph& aug) {
  BucketStructure bs;
  bs.ground_size = aug.element_node.size();
  if (bs.ground_size == 0) return bs;
  const double x = static_cast<double>(bs.ground_size);
  const double floor_y = 1.0 / (x * x);
  double loglog = x > 2.0 ? std::floor(std::log2(std::log2(x))) : 0.0;
  bs.high_index = static_cast<std::size_t>(std::max(0.0, loglog));
  for (NodeId w : aug.element_node) {
    double y = s.capacity.at(w);
    if (!aug.graph.contains(w) || !(y >= floor_y - 1e-9) || !(y > 0.0)) continue;
    bs.retained.push_back(w);
    bs.retained_mass += y * aug.node_prize[w];
    std::size_t i = bucket_index(y);
    if (bs.buckets.size() < i) bs.buckets.resize(i);
    bs.buckets[i - 1].push_back(w);
    if (i <= bs.high_index) bs.high.push_back(w);
  }
  return bs;
}

enum class ConnectMode { kDirected, kBidirected };

/// Out-tree of the augmented graph spanning the given element sinks, built on
/// the base nodes plus those sinks.
inline OutTree steiner_connect(std::span<const NodeId> terms, const AugmentedGraph& aug,
                               ConnectMode mode, double f_cap) {
  if (terms.empty()) throw ValidationError("steiner_connect: no terminals");
  std::vector<bool> keep(aug.graph.node_count(), false);
  for (NodeId v = 0; v < aug.base_count; ++v) keep[v] = aug.graph.contains(v);
  for (NodeId t : terms) keep.at(t) = true;
  SteinerInstance inst;
  inst.graph = aug.graph.induced(keep);
  inst.root = aug.root;
  inst.terminals.assign(terms.begin(), terms.end());
  if (mode == ConnectMode::kBidirected) return solve_dst_bidirected(inst).tree;
  DstOptions opt;
  opt.f_cap = f_cap;
  return solve_dst(inst, opt).tree;
}

/// The maximal subtree on base nodes (element sinks are leaves).
inline OutTree drop_element_nodes(const OutTree& t, const AugmentedGraph& aug) {
  OutTree out;
  out.root = t.root;
  for (NodeId v : t.nodes) {
    if (!aug.is_element_node(v)) {
      out.nodes.push_back(v);
      out.total_cost += aug.graph.cost(v);
    }
  }
  for (auto [u, v] : t.arcs) {
    if (!aug.is_element_node(v)) out.arcs.push_back({u, v});
  }
  return out;
}

using PrizeFn = std::function<double(std::span<const NodeId>)>;

namespace detail {

struct TrimPiece {
  std::vector<NodeId> body;
  NodeId top = 0;  // node the piece hangs from (type A) or its own top (type B)
};

}  // namespace detail

/// Cuts a tree that exceeds (1+eps)B down to a root-containing tree with cost
/// in [eps B/2, (1+eps)B] and prize-to-cost ratio at least eps/4 of the
/// input's. The tree is split bottom-up into pieces of cost at least eps B/2
/// plus a cheap residue around the root; candidates are each piece joined to
/// the root by a shortest path, and the residue joined with each adjacent
/// piece. Requires every tree node within distance B of the root in g.
inline OutTree trim_tree(const OutTree& t, double eps, double budget,
                         const NodeWeightedDigraph& g, NodeId root, const PrizeFn& prize) {
  if (!(eps > 0.0) || eps > 1.0) throw ValidationError("trim_tree: eps must lie in (0,1]");
  const double cap = (1.0 + eps) * budget;
  if (t.total_cost <= cap) return t;
  if (t.root != root) throw ValidationError("trim_tree: tree is not rooted at root");
  auto dm = shortest_paths(g, root, EndpointMode::kIncludeBoth);
  for (NodeId v : t.nodes) {
    if (!(dm.dist.at(v) <= budget)) {
      throw ValidationError("trim_tree: node " + std::to_string(v) +
                            " is farther than the budget from the root");
    }
  }
  const double piece_floor = eps * budget / 2.0;
  const std::size_t n = g.node_count();
  std::vector<std::vector<NodeId>> children(n);
  for (auto [u, v] : t.arcs) children[u].push_back(v);

  std::vector<detail::TrimPiece> pieces;
  std::vector<std::vector<NodeId>> pending(n);
  std::vector<double> pending_cost(n, 0.0);
  // Iterative post-order.
  std::vector<std::pair<NodeId, bool>> stack{{root, false}};
  while (!stack.empty()) {
    auto [u, expanded] = stack.back();
    stack.pop_back();
    if (!expanded) {
      stack.push_back({u, true});
      for (auto it = children[u].rbegin(); it != children[u].rend(); ++it) {
        stack.push_back({*it, false});
      }
      continue;
    }
    std::vector<NodeId> bundle;
    double bundle_cost = 0.0;
    for (NodeId c : children[u]) {
      if (pending[c].empty()) continue;
      bundle.insert(bundle.end(), pending[c].begin(), pending[c].end());
      bundle_cost += pending_cost[c];
      pending[c].clear();
      if (bundle_cost >= piece_floor) {
        pieces.push_back({std::move(bundle), u});
        bundle.clear();
        bundle_cost = 0.0;
      }
    }
    bundle.push_back(u);
    bundle_cost += g.cost(u);
    if (bundle_cost >= piece_floor) {
      pieces.push_back({std::move(bundle), u});
    } else {
      pending[u] = std::move(bundle);
      pending_cost[u] = bundle_cost;
    }
  }
  const std::vector<NodeId>& residue = pending[root];
  std::vector<bool> in_residue(n, false);
  for (NodeId v : residue) in_residue[v] = true;
  auto parent = tree_parents(t, n);

  const double full_prize = prize(t.nodes);
  std::optional<OutTree> best;
  double best_prize = -1.0;
  auto consider = [&](std::vector<NodeId> nodes) {
    OutTree cand = spanning_out_tree(g, root, std::move(nodes));
    double c = cand.total_cost;
    if (c < piece_floor || c > cap) return;
    double p = prize(cand.nodes);
    // p / c >= (eps/4) * p(T) / c(T), cross-multiplied.
    double lhs = 4.0 * p * t.total_cost, rhs = eps * full_prize * c;
    if (lhs < rhs - 1e-9 * std::max(1.0, rhs)) return;
    if (p > best_prize || (p == best_prize && c < best->total_cost)) {
      best_prize = p;
      best = std::move(cand);
    }
  };
  for (const auto& piece : pieces) {
    std::vector<NodeId> nodes = piece.body;
    auto path = dm.path_to(piece.top);
    nodes.insert(nodes.end(), path.begin(), path.end());
    consider(std::move(nodes));
    bool type_b = std::find(piece.body.begin(), piece.body.end(), piece.top) != piece.body.end();
    NodeId hook = type_b ? parent[piece.top] : piece.top;
    if (!residue.empty() && hook != kNoParent && in_residue[hook]) {
      std::vector<NodeId> joined = residue;
      joined.insert(joined.end(), piece.body.begin(), piece.body.end());
      consider(std::move(joined));
    }
  }
  if (!best) throw SolverError("trim_tree: no candidate met the trimming contract");
  return *best;
}

struct CandidateSummary {
  std::string branch;      // "high" or "bucket <i>"
  double delta = 1.0;
  std::size_t terminals = 0;
  double cost = 0.0;       // before trimming, base nodes only
  double prize = 0.0;
  double trimmed_cost = 0.0;
  double trimmed_prize = 0.0;
};

struct RunReport {
  OutTree tree;
  double cost = 0.0;
  double prize = 0.0;
  std::vector<ElementId> covered;
  double budget = 0.0;
  double epsilon = 1.0;
  double budget_violation = 0.0;  // cost / budget
  double lp_opt = 0.0;
  double retained_mass = 0.0;
  std::size_t bucket_count = 0;
  std::string chosen_branch;
  std::vector<CandidateSummary> candidates;
  std::map<std::string, double> timings_ms;
};

/// Everything before trimming; independent of eps.
struct BudgetedPlan {
  CoverageInstance pruned;
  AugmentedGraph aug;
  FlowLp lp;
  FracSolution solution;
  BucketStructure buckets;
  std::vector<CandidateSummary> summaries;
  std::vector<OutTree> base_trees;  // candidate trees mapped back to base nodes
  std::map<std::string, double> timings_ms;
};

struct BudgetedOptions {
  ConnectMode mode = ConnectMode::kDirected;
  std::vector<NodeId> forced_nodes;  // LP capacity fixed to 1
};

namespace detail {

class StageTimer {
 public:
  explicit StageTimer(std::map<std::string, double>& sink) : sink_(sink) {}
  void lap(const std::string& stage) {
    auto now = std::chrono::steady_clock::now();
    sink_[stage] += std::chrono::duration<double, std::milli>(now - last_).count();
    last_ = now;
  }

 private:
  std::map<std::string, double>& sink_;
  std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

}  // namespace detail

inline BudgetedPlan plan_budgeted(const CoverageInstance& inst, const BudgetedOptions& opt) {
  inst.validate();
  if (opt.mode == ConnectMode::kBidirected && inst.directed) {
    throw ValidationError("undirected solve requested on a directed instance");
  }
  BudgetedPlan plan;
  detail::StageTimer timer(plan.timings_ms);
  plan.pruned = inst;
  plan.pruned.graph = b_proper_prune(inst.graph, inst.root, inst.budget);
  plan.aug = augment_graph(plan.pruned);
  timer.lap("prune");

  DcbcBuildOptions build;
  for (NodeId v : opt.forced_nodes) {
    if (plan.pruned.graph.contains(v) && v != inst.root) build.forced_nodes.push_back(v);
  }
  plan.lp = build_dcbc_lp(plan.aug, inst.budget, build);
  plan.solution = solve_lp(plan.lp);
  if (!plan.solution.optimal()) {
    throw SolverError(std::string("LP-DCBC solve failed: ") +
                      lp::to_string(plan.solution.status));
  }
  timer.lap("lp");

  plan.buckets = select_buckets(plan.solution, plan.aug);
  const double x = static_cast<double>(std::max<std::size_t>(plan.buckets.ground_size, 1));
  struct Branch {
    std::string name;
    double delta;
    const std::vector<NodeId>* terms;
  };
  std::vector<Branch> branches;
  if (!plan.buckets.high.empty()) {
    branches.push_back({"high", std::max(1.0, std::log2(x)), &plan.buckets.high});
  }
  for (std::size_t i = 0; i < plan.buckets.buckets.size(); ++i) {
    if (plan.buckets.buckets[i].empty()) continue;
    branches.push_back({"bucket " + std::to_string(i + 1), std::ldexp(1.0, static_cast<int>(i + 1)),
                        &plan.buckets.buckets[i]});
  }
  for (const auto& b : branches) {
    OutTree t = steiner_connect(*b.terms, plan.aug, opt.mode, inst.budget);
    OutTree base = drop_element_nodes(t, plan.aug);
    CandidateSummary cs;
    cs.branch = b.name;
    cs.delta = b.delta;
    cs.terminals = b.terms->size();
    cs.cost = base.total_cost;
    cs.prize = inst.prize(base.nodes);
    plan.summaries.push_back(cs);
    plan.base_trees.push_back(std::move(base));
  }
  timer.lap("connect");
  return plan;
}

inline RunReport finish_budgeted(const BudgetedPlan& plan, double eps) {
  if (!(eps > 0.0) || eps > 1.0) throw ValidationError("epsilon must lie in (0,1]");
  const auto& inst = plan.pruned;
  RunReport rep;
  rep.timings_ms = plan.timings_ms;
  detail::StageTimer timer(rep.timings_ms);
  PrizeFn prize = [&](std::span<const NodeId> nodes) { return inst.prize(nodes); };

  OutTree best = single_node_tree(inst.graph, inst.root);
  double best_prize = prize(best.nodes);
  rep.chosen_branch = "root";
  for (std::size_t i = 0; i < plan.base_trees.size(); ++i) {
    OutTree trimmed = trim_tree(plan.base_trees[i], eps, inst.budget, inst.graph,
                                inst.root, prize);
    CandidateSummary cs = plan.summaries[i];
    cs.trimmed_cost = trimmed.total_cost;
    cs.trimmed_prize = prize(trimmed.nodes);
    rep.candidates.push_back(cs);
    if (cs.trimmed_prize > best_prize ||
        (cs.trimmed_prize == best_prize && trimmed.total_cost < best.total_cost)) {
      best = std::move(trimmed);
      best_prize = cs.trimmed_prize;
      rep.chosen_branch = cs.branch;
    }
  }
  timer.lap("trim");
  rep.tree = std::move(best);
  rep.cost = rep.tree.total_cost;
  rep.covered = inst.covered(rep.tree.nodes);
  rep.prize = best_prize;
  rep.budget = inst.budget;
  rep.epsilon = eps;
  rep.budget_violation = inst.budget > 0.0 ? rep.cost / inst.budget : 0.0;
  rep.lp_opt = plan.solution.objective;
  rep.retained_mass = plan.buckets.retained_mass;
  rep.bucket_count = plan.buckets.bucket_count();
  return rep;
}

inline RunReport solve_budgeted(const CoverageInstance& inst, double eps,
                                const BudgetedOptions& opt) {
  if (!(eps > 0.0) || eps > 1.0) throw ValidationError("epsilon must lie in (0,1]");
  return finish_budgeted(plan_budgeted(inst, opt), eps);
}

inline RunReport solve_dcbc(const CoverageInstance& inst, double eps = 1.0) {
  return solve_budgeted(inst, eps, {ConnectMode::kDirected, {}});
}

inline RunReport solve_ucbc(const CoverageInstance& inst, double eps = 1.0) {
  return solve_budgeted(inst, eps, {ConnectMode::kBidirected, {}});
}

}  // namespace cbc
