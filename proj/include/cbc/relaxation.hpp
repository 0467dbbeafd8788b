// Compact arc-flow relaxations of the budgeted coverage LP and the directed
// Steiner tree LP, plus checkers and the tree/scaling transports used as
// test certificates.
//
// Both LPs use one commodity per target node. A commodity for target v only
// gets flow variables on arcs between nodes that are reachable from the root
// and can reach v, with no arcs entering the root or leaving v. Flow
// decomposition makes this equivalent to the path formulation.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "cbc/error.hpp"
#include "cbc/graph.hpp"
#include "cbc/instance.hpp"
#include "cbc/simplex.hpp"

namespace cbc {

inline constexpr double kLpRowTol = 1e-7;
inline constexpr double kLpObjectiveTol = 1e-6;

struct Commodity {
  NodeId target = 0;
  std::vector<std::pair<Arc, std::size_t>> arcs;  // sorted by arc

  std::size_t find(Arc a) const {
    auto it = std::lower_bound(
        arcs.begin(), arcs.end(), a,
        [](const auto& entry, const Arc& key) { return entry.first < key; });
    if (it == arcs.end() || it->first != a) return SIZE_MAX;
    return it->second;
  }
};

/// An LP together with the map from graph objects to its columns.
struct FlowLp {
  lp::LpProblem problem;
  NodeId root = 0;
  std::size_t node_count = 0;
  std::vector<std::int64_t> capacity_var;  // -1 when the node has no column
  double root_capacity = 1.0;              // value used when the root has no column
  std::vector<Commodity> commodities;

  bool has_capacity(NodeId v) const {
    return v < capacity_var.size() && capacity_var[v] >= 0;
  }
};

struct CommodityFlow {
  NodeId target = 0;
  std::vector<std::pair<Arc, double>> flow;  // nonzero arcs only
};

struct FracSolution {
  lp::Status status = lp::Status::kOptimal;
  std::vector<double> values;    // raw column values
  std::vector<double> capacity;  // y_v / x_v per node, 0 without a column
  std::vector<CommodityFlow> flows;
  double objective = 0.0;
  std::size_t iterations = 0;

  bool optimal() const { return status == lp::Status::kOptimal; }
};

struct DcbcBuildOptions {
  bool check_b_proper = true;
  std::vector<NodeId> forced_nodes;  // capacity fixed to 1
};

namespace detail {

inline std::string node_tag(NodeId v) { return std::to_string(v); }

// Adds the flow columns and conservation/capacity rows for one commodity.
// Capacity rows bound the inflow of every non-root node by its capacity
// column; the target's inflow row is left to the caller.
inline Commodity add_commodity(FlowLp& f, const NodeWeightedDigraph& g,
                               const std::vector<bool>& from_root, NodeId target,
                               const char* prefix) {
  const NodeId root = f.root;
  auto to_target = reaching(g, target);
  std::vector<bool> in_net(g.node_count(), false);
  for (NodeId v = 0; v < g.node_count(); ++v) {
    in_net[v] = from_root[v] && to_target[v];
  }
  Commodity c;
  c.target = target;
  std::vector<std::vector<lp::Term>> inflow(g.node_count()), outflow(g.node_count());
  for (NodeId u = 0; u < g.node_count(); ++u) {
    if (!in_net[u] || u == target) continue;
    for (NodeId w : g.out_neighbors(u)) {
      if (!in_net[w] || w == root) continue;
      std::size_t var = f.problem.add_variable(
          std::string(prefix) + node_tag(target) + "_" + node_tag(u) + "_" +
              node_tag(w),
          0.0, 1.0, 0.0);
      c.arcs.push_back({{u, w}, var});
      outflow[u].push_back({var, 1.0});
      inflow[w].push_back({var, 1.0});
    }
  }
  const std::string tag = node_tag(target);
  for (NodeId z = 0; z < g.node_count(); ++z) {
    if (!in_net[z] || z == root || z == target) continue;
    std::vector<lp::Term> terms = inflow[z];
    for (const auto& t : outflow[z]) terms.push_back({t.var, -1.0});
    f.problem.add_row("cons_" + tag + "_" + node_tag(z), std::move(terms),
                      lp::Sense::kEqual, 0.0);
    std::vector<lp::Term> cap = inflow[z];
    cap.push_back({static_cast<std::size_t>(f.capacity_var[z]), -1.0});
    f.problem.add_row("cap_" + tag + "_" + node_tag(z), std::move(cap),
                      lp::Sense::kLessEqual, 0.0);
  }
  return c;
}

inline std::vector<lp::Term> inflow_terms(const Commodity& c, NodeId v) {
  std::vector<lp::Term> terms;
  for (const auto& [arc, var] : c.arcs) {
    if (arc.second == v) terms.push_back({var, 1.0});
  }
  return terms;
}

}  // namespace detail

/// Budgeted coverage LP on a graph whose nodes carry prizes (element nodes in
/// the augmented graph). The root's capacity is fixed to 1 and has no
/// commodity; its cost is moved to the budget right-hand side.
inline FlowLp build_dcbc_lp(const NodeWeightedDigraph& g, NodeId root,
                            std::span<const double> node_prize, double budget,
                            const DcbcBuildOptions& options = {}) {
  if (!g.contains(root)) {
    throw ValidationError("build_dcbc_lp: unknown root " + std::to_string(root));
  }
  if (node_prize.size() != g.node_count()) {
    throw ValidationError("build_dcbc_lp: one prize per node is required");
  }
  auto dm = shortest_paths(g, root, EndpointMode::kIncludeBoth);
  if (options.check_b_proper) {
    for (NodeId v : g.nodes()) {
      if (dm.reachable(v) && dm.dist[v] > budget) {
        throw ValidationError("build_dcbc_lp: graph is not B-proper, node " +
                              std::to_string(v) + " is at distance " +
                              std::to_string(dm.dist[v]));
      }
    }
  }
  if (g.cost(root) > budget) {
    throw InfeasibleError("root cost exceeds the budget");
  }
  std::vector<bool> forced(g.node_count(), false);
  for (NodeId v : options.forced_nodes) forced.at(v) = true;

  FlowLp f;
  f.problem.objective = lp::Objective::kMaximize;
  f.root = root;
  f.node_count = g.node_count();
  f.capacity_var.assign(g.node_count(), -1);
  std::vector<bool> from_root(g.node_count(), false);
  for (NodeId v : g.nodes()) from_root[v] = dm.reachable(v);

  std::vector<lp::Term> budget_row;
  for (NodeId v = 0; v < g.node_count(); ++v) {
    if (!from_root[v] || v == root) continue;
    double lower = forced[v] ? 1.0 : 0.0;
    f.capacity_var[v] = static_cast<std::int64_t>(
        f.problem.add_variable("y_" + detail::node_tag(v), lower, 1.0, node_prize[v]));
    if (g.cost(v) != 0.0) {
      budget_row.push_back({static_cast<std::size_t>(f.capacity_var[v]), g.cost(v)});
    }
  }
  f.problem.add_row("budget", std::move(budget_row), lp::Sense::kLessEqual,
                    budget - g.cost(root));
  for (NodeId v = 0; v < g.node_count(); ++v) {
    if (!from_root[v] || v == root) continue;
    Commodity c = detail::add_commodity(f, g, from_root, v, "f_");
    auto demand = detail::inflow_terms(c, v);
    demand.push_back({static_cast<std::size_t>(f.capacity_var[v]), -1.0});
    f.problem.add_row("dem_" + detail::node_tag(v), std::move(demand),
                      lp::Sense::kEqual, 0.0);
    f.commodities.push_back(std::move(c));
  }
  return f;
}

inline FlowLp build_dcbc_lp(const AugmentedGraph& aug, double budget,
                            const DcbcBuildOptions& options = {}) {
  return build_dcbc_lp(aug.graph, aug.root, aug.node_prize, budget, options);
}

/// Steiner tree LP: minimize the capacity-weighted cost such that every
/// terminal receives one unit of flow from the root. The root's capacity is
/// fixed to 1 since every tree pays for it.
inline FlowLp build_dst_lp(const SteinerInstance& inst) {
  inst.validate();
  const auto& g = inst.graph;
  const NodeId root = inst.root;
  auto from_root = reachable_from(g, root);
  for (NodeId t : inst.terminals) {
    if (!from_root[t]) {
      throw InfeasibleError("terminal " + std::to_string(t) +
                            " is unreachable from root " + std::to_string(root));
    }
  }
  FlowLp f;
  f.problem.objective = lp::Objective::kMinimize;
  f.root = root;
  f.node_count = g.node_count();
  f.capacity_var.assign(g.node_count(), -1);
  for (NodeId v = 0; v < g.node_count(); ++v) {
    if (!from_root[v]) continue;
    double lower = v == root ? 1.0 : 0.0;
    f.capacity_var[v] = static_cast<std::int64_t>(
        f.problem.add_variable("x_" + detail::node_tag(v), lower, 1.0, g.cost(v)));
  }
  std::vector<NodeId> terms = inst.terminals;
  std::sort(terms.begin(), terms.end());
  for (NodeId t : terms) {
    if (t == root) continue;
    Commodity c = detail::add_commodity(f, g, from_root, t, "g_");
    auto demand = detail::inflow_terms(c, t);
    auto cap = demand;
    f.problem.add_row("dem_" + detail::node_tag(t), std::move(demand),
                      lp::Sense::kEqual, 1.0);
    cap.push_back({static_cast<std::size_t>(f.capacity_var[t]), -1.0});
    f.problem.add_row("cap_" + detail::node_tag(t) + "_" + detail::node_tag(t),
                      std::move(cap), lp::Sense::kLessEqual, 0.0);
    f.commodities.push_back(std::move(c));
  }
  return f;
}

/// Wraps raw column values into a FracSolution (capacities, nonzero flows).
inline FracSolution make_solution(const FlowLp& f, std::vector<double> values,
                                  lp::Status status = lp::Status::kOptimal) {
  FracSolution s;
  s.status = status;
  s.values = std::move(values);
  s.capacity.assign(f.node_count, 0.0);
  if (s.values.size() != f.problem.variables.size()) {
    s.values.resize(f.problem.variables.size(), 0.0);
  }
  for (NodeId v = 0; v < f.node_count; ++v) {
    if (f.has_capacity(v)) {
      s.capacity[v] = s.values[static_cast<std::size_t>(f.capacity_var[v])];
    }
  }
  if (f.root < f.node_count && !f.has_capacity(f.root)) {
    s.capacity[f.root] = f.root_capacity;
  }
  for (const auto& c : f.commodities) {
    CommodityFlow cf;
    cf.target = c.target;
    for (const auto& [arc, var] : c.arcs) {
      if (std::abs(s.values[var]) > 1e-12) cf.flow.push_back({arc, s.values[var]});
    }
    s.flows.push_back(std::move(cf));
  }
  s.objective = f.problem.objective_value(s.values);
  return s;
}

/// Solves the LP. A non-optimal status is reported in the result, not thrown.
inline FracSolution solve_lp(const FlowLp& f, double tol = 1e-9) {
  lp::SolverOptions opt;
  opt.feasibility_tol = tol;
  opt.optimality_tol = tol;
  auto r = lp::solve(f.problem, opt);
  FracSolution s = make_solution(f, r.values, r.status);
  s.iterations = r.iterations;
  if (r.status != lp::Status::kOptimal) s.objective = 0.0;
  return s;
}

/// Lists bound and row violations beyond tol (empty when feasible).
inline std::vector<std::string> check_lp_feasible(const std::vector<double>& x,
                                                  const lp::LpProblem& p,
                                                  double tol = kLpRowTol) {
  std::vector<std::string> issues;
  if (x.size() != p.variables.size()) {
    issues.push_back("value count " + std::to_string(x.size()) +
                     " does not match variable count " +
                     std::to_string(p.variables.size()));
    return issues;
  }
  for (std::size_t j = 0; j < x.size(); ++j) {
    const auto& v = p.variables[j];
    if (!(x[j] >= v.lower - tol) || !(x[j] <= v.upper + tol)) {
      issues.push_back("variable " + v.name + " = " + std::to_string(x[j]) +
                       " outside [" + std::to_string(v.lower) + "," +
                       std::to_string(v.upper) + "]");
    }
  }
  for (const auto& row : p.rows) {
    double lhs = 0.0;
    for (const auto& t : row.terms) lhs += t.coef * x[t.var];
    double slack = row.rhs - lhs;
    bool ok = true;
    switch (row.sense) {
      case lp::Sense::kLessEqual: ok = slack >= -tol; break;
      case lp::Sense::kGreaterEqual: ok = slack <= tol; break;
      case lp::Sense::kEqual: ok = std::abs(slack) <= tol; break;
    }
    if (!ok) {
      issues.push_back("row " + row.name + " violated, slack " +
                       std::to_string(slack));
    }
  }
  return issues;
}

inline std::vector<std::string> check_lp_feasible(const FracSolution& s,
                                                  const FlowLp& f,
                                                  double tol = kLpRowTol) {
  return check_lp_feasible(s.values, f.problem, tol);
}

/// Integral LP-DCBC solution induced by a budget-feasible tree on the base
/// nodes of an augmented graph: capacity 1 on tree nodes and on the element
/// nodes they cover, unit flow along tree paths. An element's flow leaves the
/// tree at its smallest-id covering tree node.
inline FracSolution tree_to_dcbc_solution(const OutTree& t, const AugmentedGraph& aug,
                                          const FlowLp& f, double budget) {
  auto issues = validate_out_tree(t, aug.graph, aug.root);
  if (!issues.empty()) {
    throw ValidationError("tree_to_dcbc_solution: invalid tree: " + issues.front());
  }
  if (t.total_cost > budget) {
    throw ValidationError("tree_to_dcbc_solution: tree cost exceeds the budget");
  }
  const std::size_t n = aug.graph.node_count();
  auto parent = tree_parents(t, n);
  std::vector<double> y(n, 0.0);
  std::vector<NodeId> exit_node(n, kNoParent);
  for (NodeId v : t.nodes) {
    if (aug.is_element_node(v)) {
      throw ValidationError("tree_to_dcbc_solution: tree contains element node " +
                            std::to_string(v));
    }
    y[v] = 1.0;
  }
  for (NodeId v : t.nodes) {
    for (NodeId w : aug.graph.out_neighbors(v)) {
      if (aug.is_element_node(w) && exit_node[w] == kNoParent) {
        exit_node[w] = v;  // nodes are visited in increasing id order
        y[w] = 1.0;
      }
    }
  }
  std::vector<double> x(f.problem.variables.size(), 0.0);
  for (NodeId v = 0; v < n; ++v) {
    if (y[v] == 0.0 || v == f.root) continue;
    if (!f.has_capacity(v)) {
      throw ValidationError("tree_to_dcbc_solution: node " + std::to_string(v) +
                            " has no LP column");
    }
    x[static_cast<std::size_t>(f.capacity_var[v])] = 1.0;
  }
  for (const auto& c : f.commodities) {
    NodeId v = c.target;
    if (y[v] == 0.0) continue;
    NodeId u = v;
    if (aug.is_element_node(v)) {
      std::size_t var = c.find({exit_node[v], v});
      x.at(var) = 1.0;
      u = exit_node[v];
    }
    for (; u != f.root; u = parent[u]) {
      std::size_t var = c.find({parent[u], u});
      if (var == SIZE_MAX) {
        throw SolverError("tree_to_dcbc_solution: missing flow column");
      }
      x[var] = 1.0;
    }
  }
  return make_solution(f, std::move(x));
}

/// Result of moving a coverage LP solution onto the Steiner LP of the
/// instance induced by the base nodes plus a terminal set.
struct ScaledDstSolution {
  SteinerInstance instance;
  FlowLp lp;
  FracSolution solution;
};

/// Divides each terminal's commodity by its capacity y_t (so it ships one
/// unit) and sets every node capacity to the largest scaled throughput.
/// Requires y_t >= 1/delta for every terminal.
inline ScaledDstSolution scale_dcbc_to_dst_solution(const FracSolution& s,
                                                    const FlowLp& dcbc,
                                                    const AugmentedGraph& aug,
                                                    std::span<const NodeId> terminals,
                                                    double delta) {
  if (!(delta >= 1.0)) throw ValidationError("scale: delta must be at least 1");
  for (NodeId t : terminals) {
    if (!(s.capacity.at(t) >= 1.0 / delta - 1e-12)) {
      throw ValidationError("scale: terminal " + std::to_string(t) +
                            " has capacity below 1/delta");
    }
  }
  std::vector<bool> keep(aug.graph.node_count(), false);
  for (NodeId v = 0; v < aug.base_count; ++v) keep[v] = aug.graph.contains(v);
  for (NodeId t : terminals) keep.at(t) = true;
  ScaledDstSolution out;
  out.instance.graph = aug.graph.induced(keep);
  out.instance.root = aug.root;
  out.instance.terminals.assign(terminals.begin(), terminals.end());
  out.lp = build_dst_lp(out.instance);

  std::vector<double> x(out.lp.problem.variables.size(), 0.0);
  std::vector<double> cap(aug.graph.node_count(), 0.0);
  cap[aug.root] = 1.0;
  for (const auto& gc : out.lp.commodities) {
    NodeId t = gc.target;
    auto it = std::find_if(dcbc.commodities.begin(), dcbc.commodities.end(),
                           [&](const Commodity& c) { return c.target == t; });
    if (it == dcbc.commodities.end()) {
      throw ValidationError("scale: terminal " + std::to_string(t) +
                            " has no commodity in the coverage LP");
    }
    const double yt = s.capacity[t];
    std::vector<double> through(aug.graph.node_count(), 0.0);
    for (const auto& [arc, var] : gc.arcs) {
      std::size_t src = it->find(arc);
      if (src == SIZE_MAX) continue;
      double g = std::min(1.0, s.values[src] / yt);
      x[var] = g;
      through[arc.second] += g;
    }
    for (NodeId v = 0; v < through.size(); ++v) {
      cap[v] = std::max(cap[v], std::min(1.0, through[v]));
    }
    cap[t] = 1.0;
  }
  for (NodeId v = 0; v < cap.size(); ++v) {
    if (out.lp.has_capacity(v)) {
      x[static_cast<std::size_t>(out.lp.capacity_var[v])] = cap[v];
    }
  }
  out.solution = make_solution(out.lp, std::move(x));
  return out;
}

/// Writes p in CPLEX LP text format.
inline std::string write_lp_format(const lp::LpProblem& p) {
  std::ostringstream os;
  os.precision(17);
  auto term_list = [&](const std::vector<std::pair<std::string, double>>& terms) {
    if (terms.empty()) {
      os << " 0";
      return;
    }
    bool first = true;
    for (const auto& [name, coef] : terms) {
      if (coef < 0) {
        os << " - ";
      } else if (!first) {
        os << " + ";
      } else {
        os << " ";
      }
      double a = std::abs(coef);
      if (a != 1.0) os << a << " ";
      os << name;
      first = false;
    }
  };
  os << (p.objective == lp::Objective::kMaximize ? "Maximize" : "Minimize") << "\n obj:";
  std::vector<std::pair<std::string, double>> obj;
  for (const auto& v : p.variables) {
    if (v.objective != 0.0) obj.push_back({v.name, v.objective});
  }
  term_list(obj);
  os << "\nSubject To\n";
  for (const auto& row : p.rows) {
    os << " " << row.name << ":";
    std::vector<std::pair<std::string, double>> terms;
    for (const auto& t : row.terms) terms.push_back({p.variables[t.var].name, t.coef});
    term_list(terms);
    switch (row.sense) {
      case lp::Sense::kLessEqual: os << " <= "; break;
      case lp::Sense::kGreaterEqual: os << " >= "; break;
      case lp::Sense::kEqual: os << " = "; break;
    }
    os << row.rhs << "\n";
  }
  os << "Bounds\n";
  for (const auto& v : p.variables) {
    os << " " << v.lower << " <= " << v.name << " <= " << v.upper << "\n";
  }
  os << "End\n";
  return os.str();
}

}  // namespace cbc
