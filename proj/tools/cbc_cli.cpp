// Command-line front end: solve, oracle, verify, gen, bench, lp-dump.
//
// Exit codes: 0 success, 1 solver failure, 2 infeasible instance,
// 3 invalid input (including bad flags).

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "cbc/cbc.hpp"

namespace {

using namespace cbc;

constexpr int kExitSolver = 1;
constexpr int kExitInfeasible = 2;
constexpr int kExitInvalid = 3;

std::string fmt(double x) {
  if (!std::isfinite(x)) return x > 0 ? "inf" : (x < 0 ? "-inf" : "nan");
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

void emit(const std::string& text, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << text;
  } else {
    write_text(path, text);
  }
}

Json timings_json(const std::map<std::string, double>& t) {
  Json j = Json::object();
  for (const auto& [k, v] : t) j[k] = v;
  return j;
}

Json string_array(const std::vector<std::string>& xs) { return Json(xs); }

// ---------------------------------------------------------------------------
// solve

struct SolveFlags {
  std::string solver;
  std::string input;
  std::string output;
  double epsilon = 1.0;
  bool certify = false;
  std::optional<double> fcap;
  std::string format = "json";
  bool timings = false;
};

const char* expected_kind(const std::string& solver) {
  if (solver == "dst-bd") return "dst-bidirected";
  return solver.c_str();
}

SolutionRecord run_solver(const SolveFlags& fl, const InstanceFile& inst) {
  if (std::string(to_string(inst.kind)) != expected_kind(fl.solver)) {
    throw ValidationError("solver " + fl.solver + " cannot run on a " + to_string(inst.kind) +
                          " instance");
  }
  SolutionRecord s;
  s.kind = inst.kind;
  s.epsilon = fl.epsilon;
  if (fl.solver == "dcbc" || fl.solver == "ucbc") {
    RunReport rep = fl.solver == "dcbc" ? solve_dcbc(inst.coverage, fl.epsilon)
                                        : solve_ucbc(inst.coverage, fl.epsilon);
    s.tree = rep.tree;
    s.cost = rep.cost;
    s.prize = rep.prize;
    s.covered = rep.covered;
    s.lp_opt = rep.lp_opt;
    s.stats["budget"] = rep.budget;
    s.stats["budget_violation"] = rep.budget_violation;
    s.stats["retained_mass"] = rep.retained_mass;
    s.stats["bucket_count"] = rep.bucket_count;
    s.stats["chosen_branch"] = rep.chosen_branch;
    Json cands = Json::array();
    for (const auto& c : rep.candidates) {
      cands.push_back({{"branch", c.branch}, {"delta", c.delta}, {"terminals", c.terminals},
                       {"cost", c.cost}, {"prize", c.prize}, {"trimmed_cost", c.trimmed_cost},
                       {"trimmed_prize", c.trimmed_prize}});
    }
    s.stats["candidates"] = cands;
    if (fl.timings) s.stats["timings_ms"] = timings_json(rep.timings_ms);
  } else if (fl.solver == "dst") {
    DstOptions opt;
    opt.epsilon = fl.epsilon;
    opt.f_cap = fl.fcap;
    auto t0 = std::chrono::steady_clock::now();
    DstReport rep = solve_dst(inst.steiner, opt);
    s.tree = rep.tree;
    s.cost = rep.tree.total_cost;
    s.lp_opt = rep.lp_opt;
    s.stats["max_distance"] = rep.max_distance;
    s.stats["non_terminals"] = rep.non_terminals;
    s.stats["cheap"] = rep.cheap;
    s.stats["expensive"] = rep.expensive;
    s.stats["hitting_set"] = rep.hitting_set;
    s.stats["candidate_sizes"] = rep.candidate_sizes;
    s.stats["guesses"] = rep.guesses;
    s.stats["chosen_guess"] = rep.chosen_guess;
    s.stats["diagnostics"] = string_array(rep.diagnostics);
    if (fl.timings) {
      s.stats["timings_ms"] = {{"total", std::chrono::duration<double, std::milli>(
                                             std::chrono::steady_clock::now() - t0).count()}};
    }
  } else if (fl.solver == "dst-bd") {
    auto t0 = std::chrono::steady_clock::now();
    BidirectedReport rep = solve_dst_bidirected(inst.steiner, fl.certify);
    s.tree = rep.tree;
    s.cost = rep.tree.total_cost;
    s.lp_opt = rep.lp_opt;
    s.stats["certified"] = rep.certified;
    s.stats["certificate_violations"] = rep.certificate_violations;
    Json its = Json::array();
    for (const auto& it : rep.iterations) {
      Json row = {{"components", it.components}, {"center", it.center},
                  {"merged", it.merged}, {"ratio", it.ratio}};
      if (rep.certified) row["bound"] = it.bound;
      its.push_back(row);
    }
    s.stats["iterations"] = its;
    s.stats["diagnostics"] = string_array(rep.diagnostics);
    if (fl.timings) {
      s.stats["timings_ms"] = {{"total", std::chrono::duration<double, std::milli>(
                                             std::chrono::steady_clock::now() - t0).count()}};
    }
  } else {
    auto t0 = std::chrono::steady_clock::now();
    CscOptions opt;
    opt.epsilon_guess = fl.epsilon;
    CscReport rep = fl.solver == "csc" ? solve_csc(inst.coverage, opt) : solve_gst(inst.groups, opt);
    s.tree = rep.tree;
    s.cost = rep.tree.total_cost;
    if (fl.solver == "csc") {
      s.prize = inst.coverage.prize(rep.tree.nodes);
      s.covered = inst.coverage.covered(rep.tree.nodes);
    }
    s.stats["guess"] = rep.guess;
    s.stats["iteration_cap"] = rep.iteration_cap;
    auto trace_json = [](const IterationTrace& tr) {
      Json its = Json::array();
      for (const auto& it : tr.iterations) {
        its.push_back({{"uncovered_before", it.uncovered_before},
                       {"newly_covered", it.newly_covered},
                       {"tree_cost", it.tree_cost},
                       {"zeroed_nodes", it.zeroed_nodes}});
      }
      return its;
    };
    s.stats["iterations"] = trace_json(rep.trace);
    Json tried = Json::array();
    for (const auto& tr : rep.tried) {
      tried.push_back({{"guess", tr.guess}, {"accepted", tr.accepted}, {"reason", tr.reason},
                       {"iterations", tr.iterations.size()}});
    }
    s.stats["guesses_tried"] = tried;
    if (fl.timings) {
      s.stats["timings_ms"] = {{"total", std::chrono::duration<double, std::milli>(
                                             std::chrono::steady_clock::now() - t0).count()}};
    }
  }
  return s;
}

int cmd_solve(const SolveFlags& fl) {
  InstanceFile inst = parse_instance(fl.input);
  SolutionRecord s = run_solver(fl, inst);
  if (fl.format == "tsv") {
    std::ostringstream os;
    os << "kind\tcost\tprize\tlp_opt\tepsilon\tnodes\n";
    os << to_string(s.kind) << '\t' << fmt(s.cost) << '\t' << fmt(s.prize) << '\t'
       << fmt(s.lp_opt) << '\t' << fmt(s.epsilon) << '\t' << s.tree.nodes.size() << '\n';
    emit(os.str(), fl.output);
  } else {
    emit(dump_json(solution_to_json(s, inst)), fl.output);
  }
  return 0;
}

// ---------------------------------------------------------------------------
// oracle

OracleResult run_oracle(const InstanceFile& inst, std::size_t cap) {
  switch (inst.kind) {
    case InstanceKind::kDcbc:
    case InstanceKind::kUcbc: return brute_force_dcbc(inst.coverage, cap);
    case InstanceKind::kDst:
    case InstanceKind::kDstBidirected: return brute_force_dst(inst.steiner, cap);
    case InstanceKind::kCsc: return brute_force_csc(inst.coverage, cap);
    case InstanceKind::kGst: return brute_force_csc(gst_to_csc(inst.groups), cap);
  }
  throw ValidationError("unknown instance kind");
}

int cmd_oracle(const std::string& input, const std::string& output, std::size_t cap,
               const std::string& format) {
  InstanceFile inst = parse_instance(input);
  OracleResult r = run_oracle(inst, cap);
  const char* what = is_coverage_kind(inst.kind) && inst.kind != InstanceKind::kCsc ? "prize" : "cost";
  if (format == "tsv") {
    emit(std::string("kind\t") + what + "\tnodes\n" + to_string(inst.kind) + '\t' +
             fmt(r.value) + '\t' + std::to_string(r.tree.nodes.size()) + '\n',
         output);
  } else {
    Json j = {{"kind", to_string(inst.kind)},
              {"instance_digest", instance_digest(inst)},
              {"objective", what},
              {"value", r.value},
              {"tree", tree_to_json(r.tree)},
              {"cost", r.tree.total_cost}};
    emit(dump_json(j), output);
  }
  return 0;
}

// ---------------------------------------------------------------------------
// verify

int cmd_verify(const std::string& input, const std::string& solution) {
  InstanceFile inst = parse_instance(input);
  Json sol = parse_json_text(read_file(solution), solution);
  auto issues = verify_solution(inst, sol);
  if (issues.empty()) {
    std::cout << "ok\n";
    return 0;
  }
  for (const auto& issue : issues) std::cout << "invalid: " << issue << '\n';
  return kExitInvalid;
}

// ---------------------------------------------------------------------------
// gen / bench

struct GenFlags {
  std::string kind = "dcbc";
  GeneratorParams params;
  std::string budget_policy = "fraction";
  std::uint64_t seed = 0;
};

GeneratorParams resolve(const GenFlags& g) {
  GeneratorParams p = g.params;
  p.kind = parse_kind(g.kind);
  if (g.budget_policy == "fraction") {
    p.budget_policy = BudgetPolicy::kFraction;
  } else if (g.budget_policy == "oracle") {
    p.budget_policy = BudgetPolicy::kOracle;
  } else {
    throw ValidationError("--budget-policy must be fraction or oracle");
  }
  return p;
}

void add_generator_flags(CLI::App* app, GenFlags& g) {
  app->add_option("--kind", g.kind, "dcbc|ucbc|dst|dst-bidirected|csc|gst")
      ->check(CLI::IsMember({"dcbc", "ucbc", "dst", "dst-bidirected", "csc", "gst"}));
  app->add_option("--nodes", g.params.nodes, "node count (core nodes for dst-bidirected)");
  app->add_option("--elements", g.params.elements, "ground set size");
  app->add_option("--density", g.params.density, "extra arc probability");
  app->add_option("--cost-min", g.params.cost_min);
  app->add_option("--cost-max", g.params.cost_max);
  app->add_option("--prize-min", g.params.prize_min);
  app->add_option("--prize-max", g.params.prize_max);
  app->add_option("--budget-policy", g.budget_policy, "fraction|oracle");
  app->add_option("--budget-fraction", g.params.budget_fraction);
  app->add_option("--terminals", g.params.terminals);
  app->add_option("--groups", g.params.groups);
  app->add_flag("--directed,!--undirected", g.params.directed, "csc/gst orientation");
}

struct BenchRow {
  std::uint64_t seed = 0;
  std::string status = "ok";
  std::size_t nodes = 0;
  std::size_t elements = 0;
  double budget = 0.0;
  double cost = 0.0;
  double prize = 0.0;
  double lp_opt = 0.0;
  std::optional<double> oracle;
  double ratio = 0.0;      // approximation factor versus the oracle
  double violation = 0.0;  // cost / budget
  double millis = 0.0;
};

BenchRow bench_one(const GeneratorParams& p, std::uint64_t seed, const SolveFlags& fl,
                   std::size_t cap) {
  BenchRow row;
  row.seed = seed;
  auto t0 = std::chrono::steady_clock::now();
  try {
    InstanceFile inst = generate_instance(p, seed);
    row.nodes = inst.graph().node_count();
    row.elements = is_coverage_kind(inst.kind) ? inst.coverage.element_count() : 0;
    row.budget = is_coverage_kind(inst.kind) ? inst.coverage.budget : 0.0;
    SolutionRecord s = run_solver(fl, inst);
    row.cost = s.cost;
    row.prize = s.prize;
    row.lp_opt = s.lp_opt;
    row.violation = row.budget > 0 ? row.cost / row.budget : 0.0;
    if (row.nodes <= cap) {
      double opt = run_oracle(inst, cap).value;
      row.oracle = opt;
      bool maximize = inst.kind == InstanceKind::kDcbc || inst.kind == InstanceKind::kUcbc;
      double num = maximize ? opt : row.cost, den = maximize ? row.prize : opt;
      row.ratio = den > 0 ? num / den : (num > 0 ? kInfinity : 1.0);
    }
  } catch (const InfeasibleError&) {
    row.status = "infeasible";
  } catch (const ValidationError&) {
    row.status = "invalid";
  } catch (const std::exception&) {
    row.status = "failed";
  }
  row.millis = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return row;
}

int cmd_bench(const GenFlags& g, SolveFlags fl, std::uint64_t first, std::uint64_t last,
              std::size_t jobs, std::size_t cap) {
  if (last < first) throw ValidationError("--seed-to must not be below --seed-from");
  GeneratorParams p = resolve(g);
  const std::string kinds[] = {"dcbc", "ucbc", "dst", "dst-bd", "csc", "gst"};
  const InstanceKind match[] = {InstanceKind::kDcbc, InstanceKind::kUcbc, InstanceKind::kDst,
                                InstanceKind::kDstBidirected, InstanceKind::kCsc,
                                InstanceKind::kGst};
  for (std::size_t i = 0; i < 6; ++i) {
    if (match[i] == p.kind) fl.solver = kinds[i];
  }
  const std::size_t count = static_cast<std::size_t>(last - first + 1);
  std::vector<BenchRow> rows(count);
  std::atomic<std::size_t> next{0};
  jobs = std::max<std::size_t>(1, std::min(jobs, count));
  std::vector<std::thread> workers;
  for (std::size_t w = 0; w < jobs; ++w) {
    workers.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        rows[i] = bench_one(p, first + i, fl, cap);
      }
    });
  }
  for (auto& t : workers) t.join();

  std::ostringstream os;
  if (fl.format == "json") {
    Json arr = Json::array();
    for (const auto& r : rows) {
      Json j = {{"seed", r.seed}, {"status", r.status}, {"nodes", r.nodes},
                {"elements", r.elements}, {"budget", r.budget}, {"cost", r.cost},
                {"prize", r.prize}, {"lp_opt", r.lp_opt},
                {"oracle", r.oracle ? Json(*r.oracle) : Json(nullptr)},
                {"ratio", r.oracle ? Json(r.ratio) : Json(nullptr)},
                {"budget_violation", r.violation}};
      if (fl.timings) j["millis"] = r.millis;
      arr.push_back(j);
    }
    os << dump_json(arr);
  } else {
    os << "seed\tstatus\tnodes\telements\tbudget\tcost\tprize\tlp_opt\toracle\tratio\tbudget_violation";
    if (fl.timings) os << "\tmillis";
    os << '\n';
    for (const auto& r : rows) {
      os << r.seed << '\t' << r.status << '\t' << r.nodes << '\t' << r.elements << '\t'
         << fmt(r.budget) << '\t' << fmt(r.cost) << '\t' << fmt(r.prize) << '\t'
         << fmt(r.lp_opt) << '\t' << (r.oracle ? fmt(*r.oracle) : "-") << '\t'
         << (r.oracle ? fmt(r.ratio) : "-") << '\t' << fmt(r.violation);
      if (fl.timings) os << '\t' << fmt(r.millis);
      os << '\n';
    }
  }
  emit(os.str(), fl.output);
  return 0;
}

// ---------------------------------------------------------------------------
// lp-dump

int cmd_lp_dump(const std::string& input, const std::string& output) {
  InstanceFile inst = parse_instance(input);
  FlowLp f;
  if (inst.kind == InstanceKind::kDcbc || inst.kind == InstanceKind::kUcbc) {
    const auto& c = inst.coverage;
    CoverageInstance pruned = c;
    pruned.graph = b_proper_prune(c.graph, c.root, c.budget);
    f = build_dcbc_lp(augment_graph(pruned), c.budget);
  } else if (is_steiner_kind(inst.kind)) {
    f = build_dst_lp(inst.steiner);
  } else {
    throw ValidationError(std::string("lp-dump has no relaxation for kind ") + to_string(inst.kind));
  }
  emit(write_lp_format(f.problem), output);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Connected budgeted coverage and Steiner tree solvers"};
  app.require_subcommand(1);

  SolveFlags solve;
  auto* s = app.add_subcommand("solve", "Run an approximation algorithm on an instance file");
  s->add_option("solver", solve.solver, "dcbc|ucbc|dst|dst-bd|csc|gst")
      ->required()
      ->check(CLI::IsMember({"dcbc", "ucbc", "dst", "dst-bd", "csc", "gst"}));
  s->add_option("--input,-i", solve.input, "instance JSON")->required();
  s->add_option("--output,-o", solve.output, "solution path (default stdout)");
  s->add_option("--epsilon", solve.epsilon, "budget slack, or guess ladder step for csc/gst");
  s->add_flag("--certify", solve.certify, "dst-bd: check each spider against the LP bound");
  s->add_option("--fcap", solve.fcap, "dst: known distance bound, skips guessing");
  s->add_option("--format", solve.format)->check(CLI::IsMember({"json", "tsv"}));
  s->add_flag("--timings", solve.timings, "include wall-clock stage timings");
  std::uint64_t unused_seed = 0;
  s->add_option("--seed", unused_seed, "accepted for uniformity; solvers are deterministic");

  std::string oracle_input, oracle_output, oracle_format = "json";
  std::size_t cap = kDefaultOracleCap;
  auto* o = app.add_subcommand("oracle", "Exact brute-force optimum of a small instance");
  o->add_option("--input,-i", oracle_input)->required();
  o->add_option("--output,-o", oracle_output);
  o->add_option("--cap", cap, "maximum node count");
  o->add_option("--format", oracle_format)->check(CLI::IsMember({"json", "tsv"}));

  std::string verify_input, verify_solution_path;
  auto* v = app.add_subcommand("verify", "Recompute and check a solution file");
  v->add_option("--input,-i", verify_input)->required();
  v->add_option("--solution,-s", verify_solution_path)->required();

  GenFlags gen;
  std::string gen_output;
  auto* g = app.add_subcommand("gen", "Generate a seeded random instance");
  add_generator_flags(g, gen);
  g->add_option("--seed", gen.seed);
  g->add_option("--output,-o", gen_output);

  GenFlags bench_gen;
  SolveFlags bench_solve;
  bench_solve.format = "tsv";
  std::uint64_t seed_from = 0, seed_to = 9;
  std::size_t jobs = std::max(1u, std::thread::hardware_concurrency());
  std::size_t bench_cap = 12;
  auto* b = app.add_subcommand("bench", "Solve a seed range of generated instances");
  add_generator_flags(b, bench_gen);
  b->add_option("--seed-from", seed_from);
  b->add_option("--seed-to", seed_to);
  b->add_option("--epsilon", bench_solve.epsilon);
  b->add_option("--fcap", bench_solve.fcap);
  b->add_flag("--certify", bench_solve.certify);
  b->add_option("--jobs,-j", jobs, "worker threads");
  b->add_option("--cap", bench_cap, "largest instance compared against the oracle");
  b->add_option("--format", bench_solve.format)->check(CLI::IsMember({"json", "tsv"}));
  b->add_flag("--timings", bench_solve.timings, "include per-instance wall-clock time");
  b->add_option("--output,-o", bench_solve.output);

  std::string lp_input, lp_output;
  auto* l = app.add_subcommand("lp-dump", "Write the compact LP relaxation in CPLEX LP format");
  l->add_option("--input,-i", lp_input)->required();
  l->add_option("--output,-o", lp_output);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInvalid;
  }

  try {
    if (*s) return cmd_solve(solve);
    if (*o) return cmd_oracle(oracle_input, oracle_output, cap, oracle_format);
    if (*v) return cmd_verify(verify_input, verify_solution_path);
    if (*g) {
      emit(dump_json(instance_to_json(generate_instance(resolve(gen), gen.seed))), gen_output);
      return 0;
    }
    if (*b) return cmd_bench(bench_gen, bench_solve, seed_from, seed_to, jobs, bench_cap);
    if (*l) return cmd_lp_dump(lp_input, lp_output);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << '\n';
    return kExitInfeasible;
  } catch (const std::exception& e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    return kExitSolver;
  }
  return 0;
}
