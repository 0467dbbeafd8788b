// Node-weighted directed graphs, shortest paths and rooted out-trees.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <queue>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "cbc/error.hpp"

namespace cbc {

using NodeId = std::uint32_t;
using Arc = std::pair<NodeId, NodeId>;

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Directed graph with nonnegative node costs.
///
/// Node ids are dense in [0, node_count). Subgraph operations keep the id
/// space and mark dropped nodes inactive, so ids stay valid across
/// induced subgraphs and prunings.
class NodeWeightedDigraph {
 public:
  NodeWeightedDigraph() = default;

  explicit NodeWeightedDigraph(std::vector<double> costs)
      : cost_(std::move(costs)),
        active_(cost_.size(), true),
        out_(cost_.size()),
        in_(cost_.size()) {
    for (std::size_t v = 0; v < cost_.size(); ++v) {
      if (!(cost_[v] >= 0.0) || !std::isfinite(cost_[v])) {
        throw ValidationError("node " + std::to_string(v) +
                              " has a negative or non-finite cost");
      }
    }
  }

  std::size_t node_count() const noexcept { return cost_.size(); }
  std::size_t arc_count() const noexcept { return arc_count_; }

  bool contains(NodeId v) const noexcept {
    return v < cost_.size() && active_[v];
  }
  double cost(NodeId v) const { return cost_.at(v); }
  std::span<const double> costs() const noexcept { return cost_; }

  std::span<const NodeId> out_neighbors(NodeId v) const { return out_.at(v); }
  std::span<const NodeId> in_neighbors(NodeId v) const { return in_.at(v); }

  bool has_arc(NodeId u, NodeId v) const {
    if (u >= out_.size()) return false;
    return std::binary_search(out_[u].begin(), out_[u].end(), v);
  }

  void add_arc(NodeId u, NodeId v) {
    if (!contains(u) || !contains(v)) {
      throw ValidationError("arc (" + std::to_string(u) + "," +
                            std::to_string(v) + ") references an unknown node");
    }
    if (u == v) {
      throw ValidationError("self-loop at node " + std::to_string(u));
    }
    auto pos = std::lower_bound(out_[u].begin(), out_[u].end(), v);
    if (pos != out_[u].end() && *pos == v) {
      throw ValidationError("duplicate arc (" + std::to_string(u) + "," +
                            std::to_string(v) + ")");
    }
    out_[u].insert(pos, v);
    in_[v].insert(std::lower_bound(in_[v].begin(), in_[v].end(), u), u);
    ++arc_count_;
  }

  /// Adds both (u,v) and (v,u).
  void add_edge(NodeId u, NodeId v) {
    add_arc(u, v);
    add_arc(v, u);
  }

  /// Active nodes in increasing id order.
  std::vector<NodeId> nodes() const {
    std::vector<NodeId> result;
    for (NodeId v = 0; v < cost_.size(); ++v) {
      if (active_[v]) result.push_back(v);
    }
    return result;
  }

  /// Arcs in lexicographic order.
  std::vector<Arc> arcs() const {
    std::vector<Arc> result;
    result.reserve(arc_count_);
    for (NodeId u = 0; u < out_.size(); ++u) {
      for (NodeId v : out_[u]) result.emplace_back(u, v);
    }
    return result;
  }

  void set_cost(NodeId v, double c) {
    if (!(c >= 0.0) || !std::isfinite(c)) {
      throw ValidationError("negative or non-finite cost");
    }
    cost_.at(v) = c;
  }

  /// Declares the bidirected core: every arc inside the core is paired and
  /// nodes outside it have no outgoing arcs. Checked on demand by
  /// check_bidirected_core().
  void set_bidirected_core(std::vector<bool> core) {
    core_ = std::move(core);
    core_.resize(cost_.size(), false);
  }
  bool has_bidirected_core() const noexcept { return !core_.empty(); }
  bool in_core(NodeId v) const { return !core_.empty() && core_.at(v); }
  const std::vector<bool>& bidirected_core() const noexcept { return core_; }

  /// Lists violations of the bidirected-core invariants (empty when valid).
  std::vector<std::string> check_bidirected_core() const {
    std::vector<std::string> issues;
    if (core_.empty()) {
      issues.emplace_back("no bidirected core declared");
      return issues;
    }
    for (NodeId u = 0; u < out_.size(); ++u) {
      if (!active_[u]) continue;
      for (NodeId v : out_[u]) {
        if (!core_[u]) {
          issues.push_back("node " + std::to_string(u) +
                           " is outside the core but has an outgoing arc");
        } else if (core_[v] && !has_arc(v, u)) {
          issues.push_back("core arc (" + std::to_string(u) + "," +
                           std::to_string(v) + ") has no reverse");
        }
      }
    }
    return issues;
  }

  /// Returns a copy keeping only nodes with keep[v] set (and active).
  NodeWeightedDigraph induced(const std::vector<bool>& keep) const {
    NodeWeightedDigraph g;
    g.cost_ = cost_;
    g.core_ = core_;
    g.active_.assign(cost_.size(), false);
    g.out_.assign(cost_.size(), {});
    g.in_.assign(cost_.size(), {});
    for (NodeId v = 0; v < cost_.size(); ++v) {
      g.active_[v] = active_[v] && v < keep.size() && keep[v];
    }
    for (NodeId u = 0; u < out_.size(); ++u) {
      if (!g.active_[u]) continue;
      for (NodeId v : out_[u]) {
        if (g.active_[v]) {
          g.out_[u].push_back(v);
          g.in_[v].push_back(u);
          ++g.arc_count_;
        }
      }
    }
    for (auto& list : g.in_) std::sort(list.begin(), list.end());
    return g;
  }

  friend bool operator==(const NodeWeightedDigraph&,
                         const NodeWeightedDigraph&) = default;

 private:
  std::vector<double> cost_;
  std::vector<bool> active_;
  std::vector<std::vector<NodeId>> out_;
  std::vector<std::vector<NodeId>> in_;
  std::vector<bool> core_;
  std::size_t arc_count_ = 0;
};

inline std::vector<bool> node_mask(std::size_t n, std::span<const NodeId> nodes) {
  std::vector<bool> mask(n, false);
  for (NodeId v : nodes) mask.at(v) = true;
  return mask;
}

inline NodeWeightedDigraph induced_subgraph(const NodeWeightedDigraph& g,
                                            std::span<const NodeId> keep) {
  for (NodeId v : keep) {
    if (!g.contains(v)) {
      throw ValidationError("induced_subgraph: node " + std::to_string(v) +
                            " is not in the graph");
    }
  }
  return g.induced(node_mask(g.node_count(), keep));
}

// ---------------------------------------------------------------------------
// Shortest paths

enum class EndpointMode {
  kIncludeBoth,       // path cost counts every node, endpoints included
  kExcludeEndpoints,  // only interior nodes are charged
};

inline constexpr NodeId kNoParent = std::numeric_limits<NodeId>::max();

struct DistanceMap {
  NodeId source = 0;
  EndpointMode mode = EndpointMode::kIncludeBoth;
  std::vector<double> dist;    // kInfinity when unreachable
  std::vector<NodeId> parent;  // kNoParent for the source and unreachable nodes

  bool reachable(NodeId v) const { return dist.at(v) < kInfinity; }

  /// Node sequence source..v; empty when v is unreachable.
  std::vector<NodeId> path_to(NodeId v) const {
    std::vector<NodeId> path;
    if (!reachable(v)) return path;
    for (NodeId u = v; u != kNoParent; u = parent[u]) path.push_back(u);
    std::reverse(path.begin(), path.end());
    return path;
  }
};

/// Node-weighted Dijkstra. A node's own cost is charged when a path enters
/// it; the source is charged only under kIncludeBoth and under
/// kExcludeEndpoints the final node is left uncharged. Equal distances are
/// resolved toward the smaller node id, both for settle order and parents.
inline DistanceMap shortest_paths(const NodeWeightedDigraph& g, NodeId source,
                                  EndpointMode mode) {
  if (!g.contains(source)) {
    throw ValidationError("shortest_paths: unknown source node " +
                          std::to_string(source));
  }
  const std::size_t n = g.node_count();
  DistanceMap dm;
  dm.source = source;
  dm.mode = mode;
  dm.dist.assign(n, kInfinity);
  dm.parent.assign(n, kNoParent);
  // Under kExcludeEndpoints the label of v is the interior cost of the path,
  // so the charge for v is deferred until the path leaves v.
  const bool include = mode == EndpointMode::kIncludeBoth;
  std::vector<bool> settled(n, false);
  using Entry = std::pair<double, NodeId>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> queue;
  dm.dist[source] = include ? g.cost(source) : 0.0;
  queue.emplace(dm.dist[source], source);
  while (!queue.empty()) {
    auto [d, u] = queue.top();
    queue.pop();
    if (settled[u] || d > dm.dist[u]) continue;
    settled[u] = true;
    for (NodeId w : g.out_neighbors(u)) {
      if (settled[w]) continue;
      double candidate;
      if (include) {
        candidate = d + g.cost(w);
      } else {
        candidate = d + (u == source ? 0.0 : g.cost(u));
      }
      if (candidate < dm.dist[w] ||
          (candidate == dm.dist[w] && u < dm.parent[w])) {
        dm.dist[w] = candidate;
        dm.parent[w] = u;
        queue.emplace(candidate, w);
      }
    }
  }
  return dm;
}

/// Nodes reachable from source (following arcs forward).
inline std::vector<bool> reachable_from(const NodeWeightedDigraph& g,
                                        NodeId source) {
  std::vector<bool> seen(g.node_count(), false);
  if (!g.contains(source)) return seen;
  std::vector<NodeId> stack{source};
  seen[source] = true;
  while (!stack.empty()) {
    NodeId u = stack.back();
    stack.pop_back();
    for (NodeId w : g.out_neighbors(u)) {
      if (!seen[w]) {
        seen[w] = true;
        stack.push_back(w);
      }
    }
  }
  return seen;
}

/// Nodes that can reach target.
inline std::vector<bool> reaching(const NodeWeightedDigraph& g, NodeId target) {
  std::vector<bool> seen(g.node_count(), false);
  if (!g.contains(target)) return seen;
  std::vector<NodeId> stack{target};
  seen[target] = true;
  while (!stack.empty()) {
    NodeId u = stack.back();
    stack.pop_back();
    for (NodeId w : g.in_neighbors(u)) {
      if (!seen[w]) {
        seen[w] = true;
        stack.push_back(w);
      }
    }
  }
  return seen;
}

/// Largest INCLUDE_BOTH distance from root over reachable nodes.
inline double max_distance(const NodeWeightedDigraph& g, NodeId root) {
  auto dm = shortest_paths(g, root, EndpointMode::kIncludeBoth);
  double f = 0.0;
  for (double d : dm.dist) {
    if (d < kInfinity) f = std::max(f, d);
  }
  return f;
}

/// Keeps exactly the nodes within INCLUDE_BOTH distance B of root.
inline NodeWeightedDigraph b_proper_prune(const NodeWeightedDigraph& g,
                                          NodeId root, double budget) {
  if (!g.contains(root)) {
    throw ValidationError("b_proper_prune: unknown root " + std::to_string(root));
  }
  if (g.cost(root) > budget) {
    throw InfeasibleError("root cost " + std::to_string(g.cost(root)) +
                          " exceeds the budget " + std::to_string(budget));
  }
  auto dm = shortest_paths(g, root, EndpointMode::kIncludeBoth);
  std::vector<bool> keep(g.node_count(), false);
  for (NodeId v = 0; v < g.node_count(); ++v) {
    keep[v] = g.contains(v) && dm.dist[v] <= budget;
  }
  return g.induced(keep);
}

// ---------------------------------------------------------------------------
// Out-trees

struct OutTree {
  NodeId root = 0;
  std::vector<NodeId> nodes;  // sorted, includes the root
  std::vector<Arc> arcs;      // sorted
  double total_cost = 0.0;

  bool contains(NodeId v) const {
    return std::binary_search(nodes.begin(), nodes.end(), v);
  }

  friend bool operator==(const OutTree&, const OutTree&) = default;
};

inline double node_set_cost(const NodeWeightedDigraph& g,
                            std::span<const NodeId> nodes) {
  double total = 0.0;
  for (NodeId v : nodes) total += g.cost(v);
  return total;
}

inline OutTree single_node_tree(const NodeWeightedDigraph& g, NodeId root) {
  return OutTree{root, {root}, {}, g.cost(root)};
}

/// Shortest-path out-tree from root that contains every target, with
/// branches leading to no target removed.
inline OutTree extract_out_tree(const NodeWeightedDigraph& g, NodeId root,
                                std::span<const NodeId> targets) {
  auto dm = shortest_paths(g, root, EndpointMode::kIncludeBoth);
  std::vector<bool> in_tree(g.node_count(), false);
  in_tree[root] = true;
  for (NodeId t : targets) {
    if (t >= g.node_count() || !dm.reachable(t)) {
      throw InfeasibleError("target " + std::to_string(t) +
                            " is unreachable from root " + std::to_string(root));
    }
    for (NodeId u = t; u != kNoParent && !in_tree[u]; u = dm.parent[u]) {
      in_tree[u] = true;
    }
  }
  OutTree tree;
  tree.root = root;
  for (NodeId v = 0; v < g.node_count(); ++v) {
    if (!in_tree[v]) continue;
    tree.nodes.push_back(v);
    tree.total_cost += g.cost(v);
    if (v != root) tree.arcs.emplace_back(dm.parent[v], v);
  }
  std::sort(tree.arcs.begin(), tree.arcs.end());
  return tree;
}

/// Out-tree over exactly the given node set (all of them kept), rooted at
/// root, using arcs of g between those nodes.
inline OutTree spanning_out_tree(const NodeWeightedDigraph& g, NodeId root,
                                 std::vector<NodeId> nodes) {
  nodes.push_back(root);
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
  auto sub = induced_subgraph(g, nodes);
  return extract_out_tree(sub, root, nodes);
}

/// Lists every way t fails to be an out-tree of g rooted at root.
inline std::vector<std::string> validate_out_tree(const OutTree& t,
                                                  const NodeWeightedDigraph& g,
                                                  NodeId root) {
  std::vector<std::string> issues;
  auto str = [](NodeId v) { return std::to_string(v); };
  if (t.root != root) {
    issues.push_back("tree root " + str(t.root) + " differs from " + str(root));
  }
  std::vector<NodeId> sorted = t.nodes;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    issues.emplace_back("node list has duplicates");
  }
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  auto member = [&](NodeId v) {
    return std::binary_search(sorted.begin(), sorted.end(), v);
  };
  if (!member(root)) issues.push_back("root " + str(root) + " not in tree");
  for (NodeId v : sorted) {
    if (!g.contains(v)) issues.push_back("node " + str(v) + " not in graph");
  }
  std::vector<int> parents(g.node_count(), 0);
  std::vector<std::vector<NodeId>> children(g.node_count());
  for (auto [u, v] : t.arcs) {
    if (!member(u) || !member(v)) {
      issues.push_back("arc (" + str(u) + "," + str(v) +
                       ") has an endpoint outside the tree");
      continue;
    }
    if (!g.has_arc(u, v)) {
      issues.push_back("arc (" + str(u) + "," + str(v) + ") not in graph");
    }
    if (v < parents.size()) {
      ++parents[v];
      children[u].push_back(v);
    }
  }
  for (NodeId v : sorted) {
    if (v >= parents.size()) continue;
    if (v == root && parents[v] != 0) {
      issues.push_back("root " + str(v) + " has an incoming tree arc");
    } else if (v != root && parents[v] != 1) {
      issues.push_back("node " + str(v) + " has " + std::to_string(parents[v]) +
                       " parents");
    }
  }
  if (t.arcs.size() + 1 != sorted.size()) {
    issues.push_back("arc count " + std::to_string(t.arcs.size()) +
                     " does not equal node count minus one");
  }
  if (member(root) && root < g.node_count()) {
    std::vector<bool> seen(g.node_count(), false);
    std::vector<NodeId> stack{root};
    seen[root] = true;
    while (!stack.empty()) {
      NodeId u = stack.back();
      stack.pop_back();
      for (NodeId w : children[u]) {
        if (!seen[w]) {
          seen[w] = true;
          stack.push_back(w);
        }
      }
    }
    for (NodeId v : sorted) {
      if (v < seen.size() && !seen[v]) {
        issues.push_back("node " + str(v) + " is not reachable from the root");
      }
    }
  }
  double recomputed = 0.0;
  for (NodeId v : sorted) {
    if (v < g.node_count()) recomputed += g.cost(v);
  }
  if (recomputed != t.total_cost) {
    issues.push_back("cost field " + std::to_string(t.total_cost) +
                     " does not match recomputed " + std::to_string(recomputed));
  }
  return issues;
}

/// Parent of every non-root node of t (kNoParent elsewhere).
inline std::vector<NodeId> tree_parents(const OutTree& t, std::size_t n) {
  std::vector<NodeId> parent(n, kNoParent);
  for (auto [u, v] : t.arcs) parent.at(v) = u;
  return parent;
}

}  // namespace cbc
