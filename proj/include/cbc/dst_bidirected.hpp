// Steiner trees on bidirected graphs with sink terminals, by iterative
// min-ratio spider merging.
//
// Components start as one singleton per terminal plus the root. Each round
// picks a core node v and the j closest components minimizing
// (c(v) + sum of distances) / j, then fuses them along the realizing paths.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cbc/error.hpp"
#include "cbc/graph.hpp"
#include "cbc/instance.hpp"
#include "cbc/relaxation.hpp"

namespace cbc {

struct Component {
  std::vector<NodeId> nodes;  // sorted
  bool merged = false;        // false only for an untouched terminal singleton
};

struct ComponentSet {
  std::vector<Component> components;
  std::set<Arc> pool_arcs;
  std::vector<std::int64_t> owner;  // component index per node, -1 if none

  void reindex(std::size_t n) {
    owner.assign(n, -1);
    for (std::size_t i = 0; i < components.size(); ++i) {
      for (NodeId v : components[i].nodes) owner[v] = static_cast<std::int64_t>(i);
    }
  }
};

inline ComponentSet initial_components(const SteinerInstance& inst) {
  ComponentSet cs;
  cs.components.push_back({{inst.root}, true});
  std::vector<NodeId> terms = inst.terminals;
  std::sort(terms.begin(), terms.end());
  for (NodeId t : terms) {
    if (t != inst.root) cs.components.push_back({{t}, false});
  }
  cs.reindex(inst.graph.node_count());
  return cs;
}

struct ComponentDistance {
  double dist = kInfinity;
  NodeId target = kNoParent;  // node of C the distance is attained at
};

/// Interior-cost distance from v to C given v's EXCLUDE_ENDPOINTS distance
/// map: to the terminal of a singleton, else to the closest core node of C.
inline ComponentDistance component_distance(NodeId v, const Component& c,
                                            const NodeWeightedDigraph& g,
                                            const DistanceMap& from_v) {
  ComponentDistance out;
  if (std::binary_search(c.nodes.begin(), c.nodes.end(), v)) return {0.0, v};
  for (NodeId u : c.nodes) {
    bool eligible = c.merged ? g.in_core(u) : true;
    if (eligible && from_v.dist[u] < out.dist) {
      out.dist = from_v.dist[u];
      out.target = u;
    }
  }
  return out;
}

inline ComponentDistance component_distance(NodeId v, const Component& c,
                                            const NodeWeightedDigraph& g) {
  if (!g.in_core(v)) {
    throw ValidationError("component_distance: node " + std::to_string(v) +
                          " is not a core node");
  }
  return component_distance(v, c, g, shortest_paths(g, v, EndpointMode::kExcludeEndpoints));
}

struct Spider {
  NodeId center = 0;
  std::vector<std::size_t> chosen;          // component indices
  std::vector<std::vector<NodeId>> paths;   // center .. component node
  double cost = 0.0;                        // c(v) + sum of distances
  double ratio() const { return cost / static_cast<double>(chosen.size()); }
};

namespace detail {

inline bool integral_costs(const NodeWeightedDigraph& g) {
  double total = 0.0;
  for (NodeId v : g.nodes()) {
    double c = g.cost(v);
    if (c != std::floor(c)) return false;
    total += c;
  }
  return total < 9.0e15;
}

// Three-way comparison of a/j against b/k.
inline int compare_ratio(double a, std::size_t j, double b, std::size_t k, bool exact) {
  if (exact) {
    __int128 lhs = static_cast<__int128>(std::llround(a)) * static_cast<__int128>(k);
    __int128 rhs = static_cast<__int128>(std::llround(b)) * static_cast<__int128>(j);
    return lhs < rhs ? -1 : (lhs > rhs ? 1 : 0);
  }
  double x = a / static_cast<double>(j), y = b / static_cast<double>(k);
  if (x < y - 1e-9) return -1;
  if (x > y + 1e-9) return 1;
  return 0;
}

}  // namespace detail

/// Best (center, prefix) pair over all eligible centers. Ties: smaller
/// ratio, then fewer components, then smaller center id.
inline Spider min_ratio_spider(const ComponentSet& cs, const NodeWeightedDigraph& g,
                               const std::vector<bool>& centers) {
  if (cs.components.size() < 2) {
    throw ValidationError("min_ratio_spider: fewer than two components");
  }
  const bool exact = detail::integral_costs(g);
  std::optional<Spider> best;
  for (NodeId v : g.nodes()) {
    if (!centers[v]) continue;
    auto dm = shortest_paths(g, v, EndpointMode::kExcludeEndpoints);
    std::vector<std::pair<ComponentDistance, std::size_t>> order;
    for (std::size_t i = 0; i < cs.components.size(); ++i) {
      auto d = component_distance(v, cs.components[i], g, dm);
      if (d.dist < kInfinity) order.push_back({d, i});
    }
    if (order.size() < 2) continue;
    std::stable_sort(order.begin(), order.end(), [](const auto& a, const auto& b) {
      return a.first.dist < b.first.dist;
    });
    double sum = g.cost(v);
    for (std::size_t j = 1; j <= order.size(); ++j) {
      sum += order[j - 1].first.dist;
      if (j < 2) continue;
      bool better = !best;
      if (best) {
        int cmp = detail::compare_ratio(sum, j, best->cost, best->chosen.size(), exact);
        better = cmp < 0 || (cmp == 0 && j < best->chosen.size());
      }
      if (!better) continue;
      Spider s;
      s.center = v;
      s.cost = sum;
      for (std::size_t q = 0; q < j; ++q) {
        s.chosen.push_back(order[q].second);
        s.paths.push_back(dm.path_to(order[q].first.target));
      }
      best = std::move(s);
    }
  }
  if (!best) {
    throw InfeasibleError("no core node reaches two components; instance is disconnected");
  }
  return *best;
}

/// Fuses the spider's components and paths into one component. Components
/// that a path runs through are absorbed as well, so components stay disjoint.
inline ComponentSet merge_components(const ComponentSet& cs, const Spider& spider,
                                     const NodeWeightedDigraph& g) {
  ComponentSet out = cs;
  if (out.owner.size() != g.node_count()) out.reindex(g.node_count());
  std::set<std::size_t> absorbed(spider.chosen.begin(), spider.chosen.end());
  std::set<NodeId> nodes;
  for (const auto& path : spider.paths) {
    for (std::size_t i = 0; i < path.size(); ++i) {
      NodeId v = path[i];
      nodes.insert(v);
      if (out.owner[v] >= 0) absorbed.insert(static_cast<std::size_t>(out.owner[v]));
      if (i == 0) continue;
      NodeId u = path[i - 1];
      if (g.in_core(u) && g.in_core(v)) {
        out.pool_arcs.insert({u, v});
        out.pool_arcs.insert({v, u});
      } else {
        out.pool_arcs.insert({u, v});
      }
    }
  }
  nodes.insert(spider.center);
  if (out.owner[spider.center] >= 0) {
    absorbed.insert(static_cast<std::size_t>(out.owner[spider.center]));
  }
  Component fused;
  fused.merged = true;
  std::vector<Component> kept;
  for (std::size_t i = 0; i < out.components.size(); ++i) {
    if (absorbed.count(i)) {
      nodes.insert(out.components[i].nodes.begin(), out.components[i].nodes.end());
    } else {
      kept.push_back(std::move(out.components[i]));
    }
  }
  fused.nodes.assign(nodes.begin(), nodes.end());
  kept.push_back(std::move(fused));
  out.components = std::move(kept);
  out.reindex(g.node_count());
  return out;
}

/// Lists merged components whose core part is not strongly connected in the
/// accumulated arc pool.
inline std::vector<std::string> check_components(const ComponentSet& cs,
                                                 const NodeWeightedDigraph& g) {
  std::vector<std::string> issues;
  for (std::size_t i = 0; i < cs.components.size(); ++i) {
    const auto& c = cs.components[i];
    if (!c.merged) continue;
    std::vector<NodeId> core;
    for (NodeId v : c.nodes) {
      if (g.in_core(v)) core.push_back(v);
    }
    if (core.empty()) continue;
    for (bool forward : {true, false}) {
      std::set<NodeId> seen{core.front()};
      std::vector<NodeId> stack{core.front()};
      while (!stack.empty()) {
        NodeId u = stack.back();
        stack.pop_back();
        for (NodeId w : core) {
          Arc a = forward ? Arc{u, w} : Arc{w, u};
          if (!seen.count(w) && cs.pool_arcs.count(a)) {
            seen.insert(w);
            stack.push_back(w);
          }
        }
      }
      if (seen.size() != core.size()) {
        issues.push_back("component " + std::to_string(i) +
                         " core is not strongly connected in the arc pool");
        break;
      }
    }
  }
  return issues;
}

struct SpiderIteration {
  std::size_t components = 0;  // |C_i| at the start of the iteration
  NodeId center = 0;
  std::size_t merged = 0;      // |C'_i|
  double ratio = 0.0;
  double bound = kInfinity;    // LP optimum / |C_i| when certified
};

struct BidirectedReport {
  OutTree tree;
  bool certified = false;
  double lp_opt = 0.0;
  std::vector<SpiderIteration> iterations;
  std::size_t certificate_violations = 0;
  std::vector<std::string> diagnostics;
};

inline void check_sink_structure(const SteinerInstance& inst) {
  const auto& g = inst.graph;
  if (!g.has_bidirected_core()) {
    throw ValidationError("graph has no bidirected core");
  }
  auto issues = g.check_bidirected_core();
  if (!issues.empty()) throw ValidationError(issues.front());
  if (!g.in_core(inst.root)) {
    throw ValidationError("root " + std::to_string(inst.root) + " is not a core node");
  }
  for (NodeId t : inst.terminals) {
    if (t != inst.root && g.in_core(t)) {
      throw ValidationError("terminal " + std::to_string(t) + " lies in the core");
    }
  }
}

inline BidirectedReport solve_dst_bidirected(const SteinerInstance& inst, bool certify = false) {
  inst.validate();
  check_sink_structure(inst);
  const auto& g = inst.graph;
  auto reach = reachable_from(g, inst.root);
  for (NodeId t : inst.terminals) {
    if (!reach[t]) {
      throw InfeasibleError("terminal " + std::to_string(t) +
                            " is unreachable from root " + std::to_string(inst.root));
    }
  }
  BidirectedReport rep;
  rep.certified = certify;
  if (certify) {
    FracSolution s = solve_lp(build_dst_lp(inst));
    if (!s.optimal()) {
      throw SolverError(std::string("LP-DST solve failed: ") + lp::to_string(s.status));
    }
    rep.lp_opt = s.objective;
  }
  std::vector<bool> centers(g.node_count(), false);
  for (NodeId v : g.nodes()) centers[v] = reach[v] && g.in_core(v);

  ComponentSet cs = initial_components(inst);
  while (cs.components.size() > 1) {
    Spider spider = min_ratio_spider(cs, g, centers);
    SpiderIteration it;
    it.components = cs.components.size();
    it.center = spider.center;
    it.merged = spider.chosen.size();
    it.ratio = spider.ratio();
    if (certify) {
      it.bound = rep.lp_opt / static_cast<double>(it.components);
      if (it.ratio > it.bound + kLpObjectiveTol) {
        ++rep.certificate_violations;
        rep.diagnostics.push_back("iteration " + std::to_string(rep.iterations.size()) +
                                  ": ratio " + std::to_string(it.ratio) +
                                  " exceeds LP bound " + std::to_string(it.bound));
      }
    }
    rep.iterations.push_back(it);
    cs = merge_components(cs, spider, g);
  }
  std::vector<NodeId> terms = inst.terminals;
  std::sort(terms.begin(), terms.end());
  rep.tree = extract_out_tree(induced_subgraph(g, cs.components.front().nodes),
                              inst.root, terms);
  return rep;
}

}  // namespace cbc
