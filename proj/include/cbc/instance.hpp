// Problem instances shared by the solvers, oracles and file formats.
#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "cbc/error.hpp"
#include "cbc/graph.hpp"

namespace cbc {

using ElementId = std::uint32_t;

/// Rooted coverage instance: each node v carries a subset S_v of the ground
/// set, elements carry prizes. Used for DCBC/UCBC (with a budget) and for
/// connected set cover (budget ignored).
struct CoverageInstance {
  NodeWeightedDigraph graph;
  NodeId root = 0;
  double budget = 0.0;
  bool directed = true;
  std::vector<double> prizes;                  // indexed by element id
  std::vector<std::vector<ElementId>> sets;    // indexed by node id

  std::size_t element_count() const { return prizes.size(); }

  void validate() const {
    if (!graph.contains(root)) {
      throw ValidationError("root " + std::to_string(root) + " is not a node");
    }
    if (!(budget >= 0.0)) throw ValidationError("budget must be nonnegative");
    if (sets.size() != graph.node_count()) {
      throw ValidationError("one element set per node is required");
    }
    for (std::size_t x = 0; x < prizes.size(); ++x) {
      if (!(prizes[x] >= 0.0) || !std::isfinite(prizes[x])) {
        throw ValidationError("element " + std::to_string(x) +
                              " has a negative or non-finite prize");
      }
    }
    for (std::size_t v = 0; v < sets.size(); ++v) {
      for (ElementId x : sets[v]) {
        if (x >= prizes.size()) {
          throw ValidationError("node " + std::to_string(v) +
                                " references unknown element " + std::to_string(x));
        }
      }
    }
    if (!directed) {
      for (auto [u, v] : graph.arcs()) {
        if (!graph.has_arc(v, u)) {
          throw ValidationError("undirected instance has unpaired arc (" +
                                std::to_string(u) + "," + std::to_string(v) + ")");
        }
      }
    }
  }

  /// Elements covered by the union of S_v over nodes (sorted, unique).
  std::vector<ElementId> covered(std::span<const NodeId> nodes) const {
    std::vector<ElementId> out;
    for (NodeId v : nodes) {
      if (v < sets.size()) out.insert(out.end(), sets[v].begin(), sets[v].end());
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  /// Prize of the covered union, each element counted once.
  double prize(std::span<const NodeId> nodes) const {
    double total = 0.0;
    for (ElementId x : covered(nodes)) total += prizes[x];
    return total;
  }
};

/// Coverage graph with one zero-cost sink node per element appended after
/// the base nodes, and arcs v -> w_x for every x in S_v.
struct AugmentedGraph {
  NodeWeightedDigraph graph;
  NodeId root = 0;
  std::size_t base_count = 0;           // ids [0, base_count) are base nodes
  std::vector<double> node_prize;       // zero on base nodes
  std::vector<NodeId> element_node;     // element id -> node id

  bool is_element_node(NodeId v) const { return v >= base_count; }
  ElementId element_of(NodeId v) const {
    return static_cast<ElementId>(v - base_count);
  }
};

/// Node-weighted directed Steiner tree instance.
struct SteinerInstance {
  NodeWeightedDigraph graph;
  NodeId root = 0;
  std::vector<NodeId> terminals;

  void validate() const {
    if (!graph.contains(root)) {
      throw ValidationError("root " + std::to_string(root) + " is not a node");
    }
    if (terminals.empty()) throw ValidationError("terminal set is empty");
    std::vector<NodeId> sorted = terminals;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      throw ValidationError("terminals are not distinct");
    }
    for (NodeId t : terminals) {
      if (!graph.contains(t)) {
        throw ValidationError("terminal " + std::to_string(t) + " is not a node");
      }
    }
  }
};

/// Group Steiner tree instance.
struct GroupInstance {
  NodeWeightedDigraph graph;
  NodeId root = 0;
  bool directed = true;
  std::vector<std::vector<NodeId>> groups;

  void validate() const {
    if (!graph.contains(root)) {
      throw ValidationError("root " + std::to_string(root) + " is not a node");
    }
    if (groups.empty()) throw ValidationError("at least one group is required");
    for (std::size_t i = 0; i < groups.size(); ++i) {
      if (groups[i].empty()) {
        throw ValidationError("group " + std::to_string(i) + " is empty");
      }
      for (NodeId v : groups[i]) {
        if (!graph.contains(v)) {
          throw ValidationError("group " + std::to_string(i) +
                                " references unknown node " + std::to_string(v));
        }
      }
    }
  }
};

}  // namespace cbc
