// LP-rounding approximation for node-weighted directed Steiner tree.
//
// The LP solution splits terminals into cheap ones (reachable from the root
// through high-capacity nodes U) and expensive ones. Cheap terminals are
// served by a shortest-path tree inside U. Each expensive terminal t has a
// candidate set X_t of low-capacity support nodes that reach t through U; a
// greedy hitting set X' of these sets is linked to the root by shortest paths
// and to the expensive terminals through U.
#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cbc/error.hpp"
#include "cbc/graph.hpp"
#include "cbc/instance.hpp"
#include "cbc/relaxation.hpp"

namespace cbc {

inline constexpr double kThresholdSlack = 1e-9;
inline constexpr double kSupportTol = 1e-9;

/// Geometric ladder c_min (1+eps)^(i-1), i = 1..N, with N the smallest count
/// whose last value reaches c_max.
inline std::vector<double> guess_opt_schedule(double c_min, double c_max, double eps) {
  if (!(c_min > 0.0) || !(eps > 0.0) || !std::isfinite(c_max)) {
    throw ValidationError("guess_opt_schedule: c_min and eps must be positive");
  }
  if (c_max < c_min) {
    throw ValidationError("guess_opt_schedule: c_min exceeds c_max");
  }
  std::vector<double> ladder;
  double g = c_min;
  for (std::size_t i = 0;; ++i) {
    g = c_min * std::pow(1.0 + eps, static_cast<double>(i));
    ladder.push_back(g);
    if (g >= c_max) break;
  }
  return ladder;
}

struct TerminalSplit {
  double threshold = 1.0;
  std::vector<bool> in_u;          // capacity at least the threshold
  std::vector<NodeId> cheap;       // sorted
  std::vector<NodeId> expensive;   // sorted
};

/// Number of non-terminal nodes of the instance, clamped to at least 1.
inline std::size_t non_terminal_count(const SteinerInstance& inst) {
  std::vector<bool> term(inst.graph.node_count(), false);
  for (NodeId t : inst.terminals) term[t] = true;
  std::size_t n = 0;
  for (NodeId v : inst.graph.nodes()) n += term[v] ? 0 : 1;
  return std::max<std::size_t>(n, 1);
}

inline TerminalSplit split_terminals(const FracSolution& s, const SteinerInstance& inst) {
  const auto& g = inst.graph;
  TerminalSplit split;
  split.threshold = 1.0 / std::sqrt(static_cast<double>(non_terminal_count(inst)));
  split.in_u.assign(g.node_count(), false);
  for (NodeId v : g.nodes()) {
    split.in_u[v] = s.capacity.at(v) >= split.threshold - kThresholdSlack;
  }
  split.in_u[inst.root] = true;
  for (NodeId t : inst.terminals) split.in_u[t] = true;
  auto reach = reachable_from(g.induced(split.in_u), inst.root);
  std::vector<NodeId> terms = inst.terminals;
  std::sort(terms.begin(), terms.end());
  for (NodeId t : terms) (reach[t] ? split.cheap : split.expensive).push_back(t);
  return split;
}

/// X_t for every expensive terminal t: support nodes outside U from which t
/// is reachable using only nodes of U after the first.
inline std::map<NodeId, std::vector<NodeId>> candidate_sets(const FracSolution& s,
                                                            const SteinerInstance& inst,
                                                            const TerminalSplit& split) {
  std::map<NodeId, std::vector<NodeId>> sets;
  for (NodeId t : split.expensive) sets[t];
  if (split.expensive.empty()) return sets;
  const auto& g = inst.graph;
  for (NodeId w : g.nodes()) {
    if (split.in_u[w] || !(s.capacity.at(w) > kSupportTol)) continue;
    std::vector<bool> seen(g.node_count(), false);
    std::vector<NodeId> stack{w};
    seen[w] = true;
    while (!stack.empty()) {
      NodeId u = stack.back();
      stack.pop_back();
      for (NodeId z : g.out_neighbors(u)) {
        if (!seen[z] && split.in_u[z]) {
          seen[z] = true;
          stack.push_back(z);
        }
      }
    }
    for (NodeId t : split.expensive) {
      if (seen[t]) sets[t].push_back(w);
    }
  }
  return sets;
}

/// Greedy hitting set: repeatedly takes the element lying in the most sets not
/// yet hit, smallest id on ties. Returns the chosen elements sorted.
inline std::vector<NodeId> greedy_hitting_set(const std::vector<std::vector<NodeId>>& sets) {
  for (std::size_t i = 0; i < sets.size(); ++i) {
    if (sets[i].empty()) {
      throw ValidationError("greedy_hitting_set: set " + std::to_string(i) + " is empty");
    }
  }
  std::vector<bool> hit(sets.size(), false);
  std::size_t remaining = sets.size();
  std::vector<NodeId> chosen;
  while (remaining > 0) {
    std::map<NodeId, std::size_t> count;
    for (std::size_t i = 0; i < sets.size(); ++i) {
      if (hit[i]) continue;
      std::vector<NodeId> uniq = sets[i];
      std::sort(uniq.begin(), uniq.end());
      uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
      for (NodeId e : uniq) ++count[e];
    }
    NodeId best = 0;
    std::size_t best_count = 0;
    for (auto [e, c] : count) {
      if (c > best_count) {
        best = e;
        best_count = c;
      }
    }
    chosen.push_back(best);
    for (std::size_t i = 0; i < sets.size(); ++i) {
      if (!hit[i] && std::find(sets[i].begin(), sets[i].end(), best) != sets[i].end()) {
        hit[i] = true;
        --remaining;
      }
    }
  }
  std::sort(chosen.begin(), chosen.end());
  return chosen;
}

struct DstOptions {
  double epsilon = 1.0;          // ladder ratio for optimum guessing
  std::optional<double> f_cap;   // known bound on root distances; skips guessing
};

struct DstReport {
  OutTree tree;
  double lp_opt = 0.0;
  double max_distance = 0.0;  // F
  std::size_t non_terminals = 0;
  std::size_t cheap = 0;
  std::size_t expensive = 0;
  std::size_t hitting_set = 0;
  std::vector<std::size_t> candidate_sizes;  // |X_t| per expensive terminal
  std::size_t guesses = 0;
  double chosen_guess = 0.0;
  std::vector<std::string> diagnostics;
};

namespace detail {

// One rounding pass on g. Every terminal must be reachable from the root.
inline DstReport dst_round(const SteinerInstance& inst) {
  const auto& g = inst.graph;
  const NodeId r = inst.root;
  DstReport rep;
  rep.non_terminals = non_terminal_count(inst);
  FlowLp f = build_dst_lp(inst);
  FracSolution s = solve_lp(f);
  if (!s.optimal()) {
    throw SolverError(std::string("LP-DST solve failed: ") + lp::to_string(s.status));
  }
  rep.lp_opt = s.objective;
  auto split = split_terminals(s, inst);
  rep.cheap = split.cheap.size();
  rep.expensive = split.expensive.size();

  std::vector<bool> keep(g.node_count(), false);
  keep[r] = true;
  auto mark = [&](const std::vector<NodeId>& nodes) {
    for (NodeId v : nodes) keep[v] = true;
  };
  auto g_u = g.induced(split.in_u);
  if (!split.cheap.empty()) mark(extract_out_tree(g_u, r, split.cheap).nodes);

  if (!split.expensive.empty()) {
    auto sets = candidate_sets(s, inst, split);
    std::vector<std::vector<NodeId>> family;
    std::vector<NodeId> orphans;
    for (auto& [t, xt] : sets) {
      rep.candidate_sizes.push_back(xt.size());
      if (xt.empty()) {
        orphans.push_back(t);
        auto residual = check_lp_feasible(s, f, 0.0);
        rep.diagnostics.push_back("expensive terminal " + std::to_string(t) +
                                  " has an empty candidate set; " +
                                  std::to_string(residual.size()) +
                                  " LP rows with nonzero residual");
      } else {
        family.push_back(xt);
      }
    }
    auto hitting = greedy_hitting_set(family);
    rep.hitting_set = hitting.size();
    auto from_root = shortest_paths(g, r, EndpointMode::kIncludeBoth);
    for (NodeId w : hitting) mark(from_root.path_to(w));
    for (auto& [t, xt] : sets) {
      if (xt.empty()) continue;
      double best = kInfinity;
      std::vector<NodeId> best_path;
      for (NodeId w : xt) {
        if (!std::binary_search(hitting.begin(), hitting.end(), w)) continue;
        auto mask = split.in_u;
        mask[w] = true;
        auto dm = shortest_paths(g.induced(mask), w, EndpointMode::kIncludeBoth);
        if (dm.dist[t] < best) {
          best = dm.dist[t];
          best_path = dm.path_to(t);
        }
      }
      mark(best_path);
    }
    for (NodeId t : orphans) mark(from_root.path_to(t));
  }
  std::vector<NodeId> terms = inst.terminals;
  std::sort(terms.begin(), terms.end());
  rep.tree = extract_out_tree(g.induced(keep), r, terms);
  return rep;
}

}  // namespace detail

/// Steiner tree from the root spanning every terminal. Without f_cap the
/// optimum is guessed on a geometric ladder: each guess drops the nodes
/// farther from the root than the guess and the cheapest tree is kept. The
/// reported LP optimum and F always refer to the full instance.
inline DstReport solve_dst(const SteinerInstance& inst, const DstOptions& opt = {}) {
  inst.validate();
  const auto& g = inst.graph;
  auto reach = reachable_from(g, inst.root);
  for (NodeId t : inst.terminals) {
    if (!reach[t]) {
      throw InfeasibleError("terminal " + std::to_string(t) +
                            " is unreachable from root " + std::to_string(inst.root));
    }
  }
  SteinerInstance full = inst;
  full.graph = g.induced(reach);
  if (opt.f_cap) {
    DstReport rep = detail::dst_round(full);
    rep.max_distance = *opt.f_cap;
    rep.guesses = 0;
    return rep;
  }

  double c_min = kInfinity, c_total = 0.0;
  for (NodeId v : full.graph.nodes()) {
    double c = full.graph.cost(v);
    c_total += c;
    if (c > 0.0) c_min = std::min(c_min, c);
  }
  std::vector<double> ladder;
  if (c_min < kInfinity) ladder = guess_opt_schedule(c_min, c_total, opt.epsilon);
  ladder.push_back(kInfinity);  // the whole reachable graph

  auto dist = shortest_paths(full.graph, inst.root, EndpointMode::kIncludeBoth);
  std::optional<DstReport> best;
  std::vector<bool> previous;
  std::size_t tried = 0;
  double full_lp = 0.0;
  for (double guess : ladder) {
    std::vector<bool> keep(g.node_count(), false);
    for (NodeId v : full.graph.nodes()) keep[v] = dist.dist[v] <= guess;
    bool spans = keep[inst.root];
    for (NodeId t : inst.terminals) spans = spans && keep[t];
    if (!spans || keep == previous) continue;
    previous = keep;
    SteinerInstance pruned = full;
    pruned.graph = full.graph.induced(keep);
    DstReport rep = detail::dst_round(pruned);
    rep.chosen_guess = guess;
    full_lp = rep.lp_opt;
    ++tried;
    if (!best || rep.tree.total_cost < best->tree.total_cost) best = std::move(rep);
  }
  // The last tried guess always keeps the full graph; report its LP and F.
  DstReport out = std::move(*best);
  out.lp_opt = full_lp;
  out.max_distance = max_distance(full.graph, inst.root);
  out.guesses = tried;
  return out;
}

}  // namespace cbc
