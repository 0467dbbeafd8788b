// JSON instance and solution files, the seeded instance generator and the
// solution verifier.
#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cbc/coverage.hpp"
#include "cbc/error.hpp"
#include "cbc/graph.hpp"
#include "cbc/instance.hpp"
#include "cbc/oracles.hpp"

namespace cbc {

using Json = nlohmann::json;

inline constexpr int kFormatVersion = 1;

enum class InstanceKind { kDcbc, kUcbc, kDst, kDstBidirected, kCsc, kGst };

inline const char* to_string(InstanceKind k) {
  switch (k) {
    case InstanceKind::kDcbc: return "dcbc";
    case InstanceKind::kUcbc: return "ucbc";
    case InstanceKind::kDst: return "dst";
    case InstanceKind::kDstBidirected: return "dst-bidirected";
    case InstanceKind::kCsc: return "csc";
    case InstanceKind::kGst: return "gst";
  }
  return "unknown";
}

inline InstanceKind parse_kind(const std::string& s) {
  for (auto k : {InstanceKind::kDcbc, InstanceKind::kUcbc, InstanceKind::kDst,
                 InstanceKind::kDstBidirected, InstanceKind::kCsc, InstanceKind::kGst}) {
    if (s == to_string(k)) return k;
  }
  throw ValidationError("kind: unknown instance kind '" + s + "'");
}

inline bool is_coverage_kind(InstanceKind k) {
  return k == InstanceKind::kDcbc || k == InstanceKind::kUcbc || k == InstanceKind::kCsc;
}
inline bool is_steiner_kind(InstanceKind k) {
  return k == InstanceKind::kDst || k == InstanceKind::kDstBidirected;
}

/// A parsed instance file. Only the member matching the kind is populated.
struct InstanceFile {
  InstanceKind kind = InstanceKind::kDcbc;
  bool directed = true;
  CoverageInstance coverage;
  SteinerInstance steiner;
  GroupInstance groups;

  const NodeWeightedDigraph& graph() const {
    if (is_coverage_kind(kind)) return coverage.graph;
    if (is_steiner_kind(kind)) return steiner.graph;
    return groups.graph;
  }
  NodeId root() const {
    if (is_coverage_kind(kind)) return coverage.root;
    if (is_steiner_kind(kind)) return steiner.root;
    return groups.root;
  }
};

namespace detail {

inline Json number(double x) {
  if (std::isfinite(x) && x == std::floor(x) && std::abs(x) < 9.0e15) {
    return Json(static_cast<std::int64_t>(x));
  }
  return Json(x);
}

inline const Json& field(const Json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) {
    throw ValidationError(where + ": missing field '" + key + "'");
  }
  return j.at(key);
}

inline double get_number(const Json& j, const std::string& where) {
  if (!j.is_number()) throw ValidationError(where + ": expected a number");
  return j.get<double>();
}

inline NodeId get_id(const Json& j, const std::string& where, std::size_t limit,
                     const char* what) {
  if (!j.is_number_integer() || j.get<std::int64_t>() < 0) {
    throw ValidationError(where + ": expected a nonnegative integer " + what + " id");
  }
  auto v = j.get<std::int64_t>();
  if (static_cast<std::size_t>(v) >= limit) {
    throw ValidationError(where + ": unknown " + what + " " + std::to_string(v));
  }
  return static_cast<NodeId>(v);
}

inline const Json& get_array(const Json& j, const char* key, const std::string& where) {
  const Json& a = field(j, key, where);
  if (!a.is_array()) throw ValidationError(where + "." + key + ": expected an array");
  return a;
}

}  // namespace detail

inline InstanceFile parse_instance_json(const Json& j) {
  using namespace detail;
  if (!j.is_object()) throw ValidationError("instance: expected a JSON object");
  const Json& version = field(j, "format_version", "instance");
  if (!version.is_number_integer() || version.get<int>() != kFormatVersion) {
    throw ValidationError("format_version: expected " + std::to_string(kFormatVersion));
  }
  const Json& kind = field(j, "kind", "instance");
  if (!kind.is_string()) throw ValidationError("kind: expected a string");
  InstanceFile f;
  f.kind = parse_kind(kind.get<std::string>());
  const Json& directed = field(j, "directed", "instance");
  if (!directed.is_boolean()) throw ValidationError("directed: expected a boolean");
  f.directed = directed.get<bool>();
  if (f.kind == InstanceKind::kDcbc || f.kind == InstanceKind::kDst) {
    if (!f.directed) throw ValidationError(std::string("directed: kind ") + to_string(f.kind) + " requires true");
  }
  if (f.kind == InstanceKind::kUcbc || f.kind == InstanceKind::kDstBidirected) {
    if (f.directed) throw ValidationError(std::string("directed: kind ") + to_string(f.kind) + " requires false");
  }

  const Json& nodes = get_array(j, "nodes", "instance");
  const std::size_t n = nodes.size();
  std::vector<double> costs(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::string where = "nodes[" + std::to_string(i) + "]";
    NodeId id = get_id(field(nodes[i], "id", where), where + ".id", kNoParent, "node");
    if (id != i) {
      throw ValidationError(where + ".id: expected " + std::to_string(i) + ", found " +
                            std::to_string(id) + " (ids must be 0..n-1 in order)");
    }
    costs[i] = get_number(field(nodes[i], "cost", where), where + ".cost");
    if (!(costs[i] >= 0.0)) throw ValidationError(where + ".cost: must be nonnegative");
  }
  NodeWeightedDigraph g(costs);

  std::vector<double> prizes;
  if (is_coverage_kind(f.kind)) {
    const Json& elements = get_array(j, "elements", "instance");
    prizes.resize(elements.size());
    for (std::size_t x = 0; x < elements.size(); ++x) {
      std::string where = "elements[" + std::to_string(x) + "]";
      NodeId id = get_id(field(elements[x], "id", where), where + ".id", kNoParent, "element");
      if (id != x) {
        throw ValidationError(where + ".id: expected " + std::to_string(x) + ", found " +
                              std::to_string(id));
      }
      prizes[x] = get_number(field(elements[x], "prize", where), where + ".prize");
      if (!(prizes[x] >= 0.0)) throw ValidationError(where + ".prize: must be nonnegative");
    }
  }

  const Json& root_json = field(j, "root", "instance");
  NodeId root = get_id(root_json, "root", n, "node");

  std::vector<NodeId> terminals;
  std::vector<bool> is_terminal(n, false);
  if (is_steiner_kind(f.kind)) {
    const Json& ts = get_array(j, "terminals", "instance");
    for (std::size_t i = 0; i < ts.size(); ++i) {
      NodeId t = get_id(ts[i], "terminals[" + std::to_string(i) + "]", n, "node");
      terminals.push_back(t);
      is_terminal[t] = true;
    }
  }

  const Json& arcs = get_array(j, "arcs", "instance");
  const bool undirected = !f.directed;
  for (std::size_t i = 0; i < arcs.size(); ++i) {
    std::string where = "arcs[" + std::to_string(i) + "]";
    if (!arcs[i].is_array() || arcs[i].size() != 2) {
      throw ValidationError(where + ": expected a pair [u, v]");
    }
    NodeId u = get_id(arcs[i][0], where + "[0]", n, "node");
    NodeId v = get_id(arcs[i][1], where + "[1]", n, "node");
    try {
      if (f.kind == InstanceKind::kDstBidirected && (is_terminal[u] || is_terminal[v])) {
        if (is_terminal[u] && is_terminal[v]) {
          throw ValidationError("edge joins two terminals");
        }
        if (is_terminal[u]) std::swap(u, v);
        g.add_arc(u, v);
      } else if (undirected) {
        g.add_edge(u, v);
      } else {
        g.add_arc(u, v);
      }
    } catch (const ValidationError& e) {
      throw ValidationError(where + ": " + e.what());
    }
  }
  if (f.kind == InstanceKind::kDstBidirected) {
    std::vector<bool> core(n, true);
    for (NodeId t : terminals) core[t] = false;
    g.set_bidirected_core(core);
  }

  if (is_coverage_kind(f.kind)) {
    f.coverage.graph = std::move(g);
    f.coverage.root = root;
    f.coverage.directed = f.directed;
    f.coverage.prizes = prizes;
    f.coverage.sets.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      std::string where = "nodes[" + std::to_string(i) + "].elements";
      if (!nodes[i].contains("elements")) continue;
      const Json& es = nodes[i].at("elements");
      if (!es.is_array()) throw ValidationError(where + ": expected an array");
      for (std::size_t k = 0; k < es.size(); ++k) {
        f.coverage.sets[i].push_back(get_id(es[k], where + "[" + std::to_string(k) + "]",
                                            prizes.size(), "element"));
      }
    }
    if (f.kind != InstanceKind::kCsc) {
      f.coverage.budget = get_number(field(j, "budget", "instance"), "budget");
    }
    f.coverage.validate();
  } else if (is_steiner_kind(f.kind)) {
    f.steiner.graph = std::move(g);
    f.steiner.root = root;
    f.steiner.terminals = terminals;
    f.steiner.validate();
    if (f.kind == InstanceKind::kDstBidirected) check_sink_structure(f.steiner);
  } else {
    f.groups.graph = std::move(g);
    f.groups.root = root;
    f.groups.directed = f.directed;
    const Json& gs = get_array(j, "groups", "instance");
    for (std::size_t i = 0; i < gs.size(); ++i) {
      std::string where = "groups[" + std::to_string(i) + "]";
      if (!gs[i].is_array()) throw ValidationError(where + ": expected an array");
      std::vector<NodeId> group;
      for (std::size_t k = 0; k < gs[i].size(); ++k) {
        group.push_back(get_id(gs[i][k], where + "[" + std::to_string(k) + "]", n, "node"));
      }
      f.groups.groups.push_back(std::move(group));
    }
    f.groups.validate();
  }
  return f;
}

/// Canonical JSON form; parse_instance_json(instance_to_json(f)) reproduces f.
inline Json instance_to_json(const InstanceFile& f) {
  using detail::number;
  const auto& g = f.graph();
  Json j = Json::object();
  j["format_version"] = kFormatVersion;
  j["kind"] = to_string(f.kind);
  j["directed"] = f.directed;
  Json nodes = Json::array();
  for (NodeId v = 0; v < g.node_count(); ++v) {
    Json node = {{"id", v}, {"cost", number(g.cost(v))}};
    if (is_coverage_kind(f.kind)) {
      std::vector<ElementId> xs = f.coverage.sets[v];
      node["elements"] = xs;
    }
    nodes.push_back(node);
  }
  j["nodes"] = nodes;
  Json arcs = Json::array();
  std::vector<bool> terminal(g.node_count(), false);
  if (is_steiner_kind(f.kind)) {
    for (NodeId t : f.steiner.terminals) terminal[t] = true;
  }
  for (auto [u, v] : g.arcs()) {
    bool once = !f.directed && g.has_arc(v, u);
    if (once && u > v) continue;
    arcs.push_back({u, v});
  }
  j["arcs"] = arcs;
  if (is_coverage_kind(f.kind)) {
    Json elements = Json::array();
    for (std::size_t x = 0; x < f.coverage.prizes.size(); ++x) {
      elements.push_back({{"id", x}, {"prize", number(f.coverage.prizes[x])}});
    }
    j["elements"] = elements;
    if (f.kind != InstanceKind::kCsc) j["budget"] = number(f.coverage.budget);
  }
  j["root"] = f.root();
  if (is_steiner_kind(f.kind)) j["terminals"] = f.steiner.terminals;
  if (f.kind == InstanceKind::kGst) j["groups"] = f.groups.groups;
  return j;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

inline Json parse_json_text(const std::string& text, const std::string& source) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ValidationError(source + ": " + e.what());
  }
}

inline InstanceFile parse_instance(const std::string& path) {
  return parse_instance_json(parse_json_text(read_file(path), path));
}

/// FNV-1a 64-bit hash of the canonical instance text, as 16 hex digits.
inline std::string instance_digest(const InstanceFile& f) {
  std::string text = instance_to_json(f).dump();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline Json tree_to_json(const OutTree& t) {
  Json arcs = Json::array();
  for (auto [u, v] : t.arcs) arcs.push_back({u, v});
  return {{"root", t.root}, {"nodes", t.nodes}, {"arcs", arcs}};
}

inline OutTree tree_from_json(const Json& j, const NodeWeightedDigraph& g) {
  using namespace detail;
  OutTree t;
  const std::size_t n = g.node_count();
  t.root = get_id(field(j, "root", "tree"), "tree.root", n, "node");
  const Json& nodes = get_array(j, "nodes", "tree");
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    t.nodes.push_back(get_id(nodes[i], "tree.nodes[" + std::to_string(i) + "]", n, "node"));
  }
  const Json& arcs = get_array(j, "arcs", "tree");
  for (std::size_t i = 0; i < arcs.size(); ++i) {
    std::string where = "tree.arcs[" + std::to_string(i) + "]";
    if (!arcs[i].is_array() || arcs[i].size() != 2) {
      throw ValidationError(where + ": expected a pair [u, v]");
    }
    t.arcs.push_back({get_id(arcs[i][0], where, n, "node"), get_id(arcs[i][1], where, n, "node")});
  }
  for (NodeId v : t.nodes) {
    if (v < n) t.total_cost += g.cost(v);
  }
  return t;
}

/// Solution summary shared by every solver kind.
struct SolutionRecord {
  InstanceKind kind = InstanceKind::kDcbc;
  OutTree tree;
  double cost = 0.0;
  double prize = 0.0;
  std::vector<ElementId> covered;
  double epsilon = 0.0;
  double lp_opt = 0.0;
  Json stats = Json::object();
};

inline Json solution_to_json(const SolutionRecord& s, const InstanceFile& inst) {
  using detail::number;
  Json j = Json::object();
  j["format_version"] = kFormatVersion;
  j["kind"] = to_string(s.kind);
  j["instance_digest"] = instance_digest(inst);
  j["tree"] = tree_to_json(s.tree);
  j["cost"] = number(s.cost);
  if (is_coverage_kind(s.kind)) {
    j["prize"] = number(s.prize);
    j["covered"] = s.covered;
  }
  j["epsilon"] = number(s.epsilon);
  j["lp_opt"] = s.lp_opt;
  j["stats"] = s.stats;
  return j;
}

inline std::string dump_json(const Json& j) { return j.dump(2) + "\n"; }

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path);
  out << text;
}

inline void write_solution(const SolutionRecord& s, const InstanceFile& inst,
                           const std::string& path) {
  write_text(path, dump_json(solution_to_json(s, inst)));
}

/// Recomputes everything a solution file claims from the instance alone and
/// lists each disagreement (empty when the solution checks out).
inline std::vector<std::string> verify_solution(const InstanceFile& inst, const Json& sol) {
  std::vector<std::string> issues;
  OutTree t;
  try {
    if (detail::field(sol, "instance_digest", "solution") != instance_digest(inst)) {
      issues.emplace_back("instance digest does not match the instance");
    }
    if (detail::field(sol, "kind", "solution") != to_string(inst.kind)) {
      issues.emplace_back("solution kind differs from the instance kind");
    }
    t = tree_from_json(detail::field(sol, "tree", "solution"), inst.graph());
  } catch (const ValidationError& e) {
    issues.emplace_back(e.what());
    return issues;
  }
  const auto& g = inst.graph();
  for (auto& issue : validate_out_tree(t, g, inst.root())) issues.push_back("tree: " + issue);
  double claimed_cost = sol.value("cost", -1.0);
  if (claimed_cost != t.total_cost) {
    issues.push_back("cost " + std::to_string(claimed_cost) + " differs from recomputed " +
                     std::to_string(t.total_cost));
  }
  if (is_coverage_kind(inst.kind)) {
    auto covered = inst.coverage.covered(t.nodes);
    double prize = inst.coverage.prize(t.nodes);
    if (sol.contains("prize") && sol["prize"].is_number() &&
        sol["prize"].get<double>() != prize) {
      issues.push_back("prize differs from recomputed " + std::to_string(prize));
    }
    if (!sol.contains("covered") || sol["covered"] != Json(covered)) {
      issues.emplace_back("covered list differs from recomputed coverage");
    }
    if (inst.kind == InstanceKind::kCsc && covered.size() != inst.coverage.element_count()) {
      issues.emplace_back("tree does not cover every element");
    }
    if (inst.kind != InstanceKind::kCsc) {
      double eps = sol.value("epsilon", 0.0);
      if (t.total_cost > (1.0 + eps) * inst.coverage.budget) {
        issues.emplace_back("tree cost exceeds (1+epsilon) times the budget");
      }
    }
  } else if (is_steiner_kind(inst.kind)) {
    for (NodeId r : inst.steiner.terminals) {
      if (!t.contains(r)) issues.push_back("terminal " + std::to_string(r) + " not spanned");
    }
  } else {
    for (std::size_t i = 0; i < inst.groups.groups.size(); ++i) {
      bool touched = false;
      for (NodeId v : inst.groups.groups[i]) touched |= t.contains(v);
      if (!touched) issues.push_back("group " + std::to_string(i) + " not touched");
    }
  }
  return issues;
}

// ---------------------------------------------------------------------------
// Generator

enum class BudgetPolicy { kFraction, kOracle };

struct GeneratorParams {
  InstanceKind kind = InstanceKind::kDcbc;
  std::size_t nodes = 10;
  std::size_t elements = 6;
  double density = 0.15;
  int cost_min = 0;
  int cost_max = 5;
  int prize_min = 1;
  int prize_max = 5;
  BudgetPolicy budget_policy = BudgetPolicy::kFraction;
  double budget_fraction = 0.3;
  std::size_t terminals = 3;  // dst kinds; dst-bidirected adds them as sinks
  std::size_t groups = 3;     // gst
  bool directed = true;       // csc and gst only
};

/// Deterministic instance for (params, seed). A random arborescence from node
/// 0 guarantees every node is reachable from the root.
inline InstanceFile generate_instance(const GeneratorParams& p, std::uint64_t seed) {
  if (p.nodes == 0) throw ValidationError("generator: at least one node is required");
  if (p.cost_min < 0 || p.cost_max < p.cost_min || p.prize_min < 0 ||
      p.prize_max < p.prize_min) {
    throw ValidationError("generator: invalid cost or prize range");
  }
  if (!(p.density >= 0.0 && p.density <= 1.0)) {
    throw ValidationError("generator: density must lie in [0,1]");
  }
  std::mt19937_64 rng(seed);
  auto uniform = [&](int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng);
  };
  InstanceFile f;
  f.kind = p.kind;
  switch (p.kind) {
    case InstanceKind::kDcbc:
    case InstanceKind::kDst: f.directed = true; break;
    case InstanceKind::kUcbc:
    case InstanceKind::kDstBidirected: f.directed = false; break;
    default: f.directed = p.directed;
  }
  const bool sinks = p.kind == InstanceKind::kDstBidirected;
  const std::size_t core = p.nodes;
  const std::size_t total = core + (sinks ? p.terminals : 0);
  std::vector<double> costs(total);
  for (auto& c : costs) c = uniform(p.cost_min, p.cost_max);
  NodeWeightedDigraph g(costs);
  std::bernoulli_distribution extra(p.density);
  const bool paired = !f.directed;
  for (NodeId v = 1; v < core; ++v) {
    NodeId u = static_cast<NodeId>(uniform(0, static_cast<int>(v) - 1));
    paired ? g.add_edge(u, v) : g.add_arc(u, v);
  }
  for (NodeId u = 0; u < core; ++u) {
    for (NodeId v = paired ? u + 1 : 0; v < core; ++v) {
      if (u == v || g.has_arc(u, v)) continue;
      if (extra(rng)) paired ? g.add_edge(u, v) : g.add_arc(u, v);
    }
  }
  if (sinks) {
    std::vector<bool> core_mask(total, false);
    for (std::size_t v = 0; v < core; ++v) core_mask[v] = true;
    for (std::size_t i = 0; i < p.terminals; ++i) {
      NodeId t = static_cast<NodeId>(core + i);
      int in = uniform(1, 2);
      for (int k = 0; k < in; ++k) {
        NodeId u = static_cast<NodeId>(uniform(0, static_cast<int>(core) - 1));
        if (!g.has_arc(u, t)) g.add_arc(u, t);
      }
      f.steiner.terminals.push_back(t);
    }
    g.set_bidirected_core(core_mask);
  }

  if (is_coverage_kind(p.kind)) {
    auto& c = f.coverage;
    c.root = 0;
    c.directed = f.directed;
    c.prizes.resize(p.elements);
    c.sets.assign(core, {});
    for (std::size_t x = 0; x < p.elements; ++x) {
      c.prizes[x] = p.kind == InstanceKind::kCsc ? 1 : uniform(p.prize_min, p.prize_max);
      int holders = uniform(1, std::min<int>(3, static_cast<int>(core)));
      for (int k = 0; k < holders; ++k) {
        NodeId v = static_cast<NodeId>(uniform(0, static_cast<int>(core) - 1));
        auto& s = c.sets[v];
        if (std::find(s.begin(), s.end(), x) == s.end()) s.push_back(static_cast<ElementId>(x));
      }
    }
    for (auto& s : c.sets) std::sort(s.begin(), s.end());
    c.graph = std::move(g);
    if (p.kind != InstanceKind::kCsc) {
      double base = 0.0;
      if (p.budget_policy == BudgetPolicy::kFraction) {
        for (NodeId v = 0; v < core; ++v) base += c.graph.cost(v);
      } else {
        base = brute_force_csc(c).value;
      }
      c.budget = std::max(c.graph.cost(0), std::floor(p.budget_fraction * base));
    }
    c.validate();
  } else if (p.kind == InstanceKind::kDst) {
    f.steiner.graph = std::move(g);
    f.steiner.root = 0;
    std::vector<NodeId> pool;
    for (NodeId v = 1; v < core; ++v) pool.push_back(v);
    std::shuffle(pool.begin(), pool.end(), rng);
    std::size_t k = std::min(std::max<std::size_t>(p.terminals, 1), pool.size());
    if (pool.empty()) pool.push_back(0), k = 1;
    f.steiner.terminals.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(k));
    std::sort(f.steiner.terminals.begin(), f.steiner.terminals.end());
    f.steiner.validate();
  } else if (sinks) {
    f.steiner.graph = std::move(g);
    f.steiner.root = 0;
    if (f.steiner.terminals.empty()) throw ValidationError("generator: no terminals");
    f.steiner.validate();
  } else {
    f.groups.graph = std::move(g);
    f.groups.root = 0;
    f.groups.directed = f.directed;
    for (std::size_t i = 0; i < std::max<std::size_t>(p.groups, 1); ++i) {
      std::vector<NodeId> group;
      int size = uniform(1, std::min<int>(3, static_cast<int>(core)));
      for (int k = 0; k < size; ++k) {
        NodeId v = static_cast<NodeId>(uniform(0, static_cast<int>(core) - 1));
        if (std::find(group.begin(), group.end(), v) == group.end()) group.push_back(v);
      }
      std::sort(group.begin(), group.end());
      f.groups.groups.push_back(std::move(group));
    }
    f.groups.validate();
  }
  return f;
}

}  // namespace cbc
