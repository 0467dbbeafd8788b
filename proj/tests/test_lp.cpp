#include <gtest/gtest.h>

#include <array>
#include <random>

#include "cbc/relaxation.hpp"
#include "cbc/simplex.hpp"
#include "support.hpp"

namespace cbc {
namespace {

using lp::Sense;

TEST(Simplex, TextbookMaximum) {
  lp::LpProblem p;
  auto x = p.add_variable("x", 0, kInfinity, 3);
  auto y = p.add_variable("y", 0, kInfinity, 2);
  p.add_row("a", {{x, 1}, {y, 1}}, Sense::kLessEqual, 4);
  p.add_row("b", {{x, 1}, {y, 3}}, Sense::kLessEqual, 6);
  p.add_row("c", {{x, 1}}, Sense::kLessEqual, 3);
  auto r = lp::solve(p);
  ASSERT_EQ(r.status, lp::Status::kOptimal);
  EXPECT_NEAR(r.objective, 11.0, 1e-9);
  EXPECT_NEAR(r.values[x], 3.0, 1e-9);
  EXPECT_NEAR(r.values[y], 1.0, 1e-9);
}

TEST(Simplex, EqualityAndGreaterRowsNeedPhaseOne) {
  lp::LpProblem p;
  p.objective = lp::Objective::kMinimize;
  auto x = p.add_variable("x", 0, 10, 1);
  auto y = p.add_variable("y", 0, 10, 2);
  p.add_row("sum", {{x, 1}, {y, 1}}, Sense::kEqual, 5);
  p.add_row("floor", {{y, 1}}, Sense::kGreaterEqual, 2);
  auto r = lp::solve(p);
  ASSERT_EQ(r.status, lp::Status::kOptimal);
  EXPECT_NEAR(r.objective, 7.0, 1e-9);
}

TEST(Simplex, InfeasibleAndUnbounded) {
  lp::LpProblem bad;
  auto x = bad.add_variable("x", 0, 1, 1);
  bad.add_row("r", {{x, 1}}, Sense::kGreaterEqual, 2);
  EXPECT_EQ(lp::solve(bad).status, lp::Status::kInfeasible);

  lp::LpProblem open;
  auto z = open.add_variable("z", 0, kInfinity, 1);
  open.add_row("r", {{z, 1}}, Sense::kGreaterEqual, 1);
  EXPECT_EQ(lp::solve(open).status, lp::Status::kUnbounded);
}

TEST(Simplex, EmptyProblem) {
  lp::LpProblem p;
  auto r = lp::solve(p);
  EXPECT_EQ(r.status, lp::Status::kOptimal);
  EXPECT_EQ(r.objective, 0.0);
}

// Vertex enumeration over 3 variables: every basic solution is the solution
// of 3 tight constraints chosen among rows and bounds.
double vertex_oracle(const lp::LpProblem& p, bool& feasible) {
  struct Plane {
    std::array<double, 3> a;
    double b;
  };
  std::vector<Plane> planes;
  for (const auto& row : p.rows) {
    Plane pl{{0, 0, 0}, row.rhs};
    for (const auto& t : row.terms) pl.a[t.var] += t.coef;
    planes.push_back(pl);
  }
  for (std::size_t j = 0; j < 3; ++j) {
    Plane lo{{0, 0, 0}, p.variables[j].lower};
    lo.a[j] = 1;
    Plane hi{{0, 0, 0}, p.variables[j].upper};
    hi.a[j] = 1;
    planes.push_back(lo);
    planes.push_back(hi);
  }
  double best = -kInfinity;
  feasible = false;
  for (std::size_t i = 0; i < planes.size(); ++i)
    for (std::size_t j = i + 1; j < planes.size(); ++j)
      for (std::size_t k = j + 1; k < planes.size(); ++k) {
        double m[3][4];
        const Plane* sel[3] = {&planes[i], &planes[j], &planes[k]};
        for (int r = 0; r < 3; ++r) {
          for (int c = 0; c < 3; ++c) m[r][c] = sel[r]->a[c];
          m[r][3] = sel[r]->b;
        }
        bool singular = false;
        for (int c = 0; c < 3 && !singular; ++c) {
          int piv = c;
          for (int r = c + 1; r < 3; ++r)
            if (std::abs(m[r][c]) > std::abs(m[piv][c])) piv = r;
          if (std::abs(m[piv][c]) < 1e-12) {
            singular = true;
            break;
          }
          for (int q = 0; q < 4; ++q) std::swap(m[c][q], m[piv][q]);
          for (int r = 0; r < 3; ++r) {
            if (r == c) continue;
            double f = m[r][c] / m[c][c];
            for (int q = 0; q < 4; ++q) m[r][q] -= f * m[c][q];
          }
        }
        if (singular) continue;
        std::vector<double> x(3);
        for (int r = 0; r < 3; ++r) x[r] = m[r][3] / m[r][r];
        if (!check_lp_feasible(x, p, 1e-9).empty()) continue;
        feasible = true;
        double obj = p.objective_value(x);
        if (p.objective == lp::Objective::kMinimize) obj = -obj;
        best = std::max(best, obj);
      }
  return p.objective == lp::Objective::kMinimize ? -best : best;
}

TEST(Simplex, MatchesVertexEnumerationOnRandomBoxedLps) {
  std::mt19937_64 rng(19);
  std::uniform_int_distribution<int> coef(-4, 4), rhs(-3, 8), bound(1, 4);
  int solved = 0;
  for (int trial = 0; trial < 300; ++trial) {
    lp::LpProblem p;
    p.objective = trial % 2 ? lp::Objective::kMaximize : lp::Objective::kMinimize;
    for (int j = 0; j < 3; ++j) {
      p.add_variable("v" + std::to_string(j), 0, bound(rng), coef(rng));
    }
    int rows = 1 + trial % 4;
    for (int i = 0; i < rows; ++i) {
      std::vector<lp::Term> terms;
      for (std::size_t j = 0; j < 3; ++j) terms.push_back({j, double(coef(rng))});
      auto sense = static_cast<Sense>(rng() % 3);
      p.add_row("r" + std::to_string(i), terms, sense, rhs(rng));
    }
    bool feasible = false;
    double ref = vertex_oracle(p, feasible);
    auto r = lp::solve(p);
    if (!feasible) {
      EXPECT_EQ(r.status, lp::Status::kInfeasible) << "trial " << trial;
      continue;
    }
    ASSERT_EQ(r.status, lp::Status::kOptimal) << "trial " << trial;
    EXPECT_NEAR(r.objective, ref, 1e-7) << "trial " << trial;
    EXPECT_TRUE(check_lp_feasible(r.values, p).empty());
    ++solved;
  }
  EXPECT_GT(solved, 100);
}

// r(0) -> a(3) -> w_x, p(x) = 7.
AugmentedGraph single_element_chain() {
  AugmentedGraph aug;
  aug.graph = testing::make_graph({0, 3, 0}, {{0, 1}, {1, 2}});
  aug.root = 0;
  aug.base_count = 2;
  aug.node_prize = {0, 0, 7};
  aug.element_node = {2};
  return aug;
}

TEST(DcbcLp, RootOnly) {
  AugmentedGraph bare;
  bare.graph = NodeWeightedDigraph({2});
  bare.base_count = 1;
  bare.node_prize = {0};
  auto s = solve_lp(build_dcbc_lp(bare, 5));
  ASSERT_TRUE(s.optimal());
  EXPECT_EQ(s.objective, 0.0);

  AugmentedGraph one;
  one.graph = testing::make_graph({2, 0}, {{0, 1}});
  one.base_count = 1;
  one.node_prize = {0, 4};
  one.element_node = {1};
  auto t = solve_lp(build_dcbc_lp(one, 5));
  EXPECT_NEAR(t.objective, 4.0, 1e-9);
  EXPECT_NEAR(t.capacity[1], 1.0, 1e-9);
}

TEST(DcbcLp, FullBudgetBuysTheElement) {
  auto aug = single_element_chain();
  auto f = build_dcbc_lp(aug, 3);
  auto s = solve_lp(f);
  ASSERT_TRUE(s.optimal());
  EXPECT_NEAR(s.objective, 7.0, kLpObjectiveTol);
  EXPECT_TRUE(check_lp_feasible(s, f).empty());
}

TEST(DcbcLp, BindingBudgetGivesFractionalCapacity) {
  auto aug = single_element_chain();
  EXPECT_THROW(build_dcbc_lp(aug, 2), ValidationError);  // not B-proper
  DcbcBuildOptions opt;
  opt.check_b_proper = false;
  auto f = build_dcbc_lp(aug, 2, opt);
  auto s = solve_lp(f);
  ASSERT_TRUE(s.optimal());
  EXPECT_NEAR(s.objective, 14.0 / 3.0, kLpObjectiveTol);
  EXPECT_NEAR(s.capacity[1], 2.0 / 3.0, 1e-9);
}

SteinerInstance two_path_dst() {
  // r=0, relays a=1 (3) and b=2 (5), terminal t=3.
  SteinerInstance inst;
  inst.graph = testing::make_graph({0, 3, 5, 0}, {{0, 1}, {1, 3}, {0, 2}, {2, 3}});
  inst.root = 0;
  inst.terminals = {3};
  return inst;
}

TEST(DstLp, Examples) {
  SteinerInstance path;
  path.graph = testing::make_graph({0, 3, 0}, {{0, 1}, {1, 2}});
  path.terminals = {2};
  EXPECT_NEAR(solve_lp(build_dst_lp(path)).objective, 3.0, kLpObjectiveTol);

  auto f = build_dst_lp(two_path_dst());
  auto s = solve_lp(f);
  ASSERT_TRUE(s.optimal());
  EXPECT_NEAR(s.objective, 3.0, kLpObjectiveTol);
  EXPECT_TRUE(check_lp_feasible(s, f).empty());

  SteinerInstance adjacent;
  adjacent.graph = testing::make_graph({0, 0}, {{0, 1}});
  adjacent.terminals = {1};
  EXPECT_NEAR(solve_lp(build_dst_lp(adjacent)).objective, 0.0, kLpObjectiveTol);
}

TEST(DstLp, UnreachableTerminalIsInfeasible) {
  SteinerInstance inst;
  inst.graph = testing::make_graph({0, 0, 0}, {{0, 1}});
  inst.terminals = {2};
  EXPECT_THROW(build_dst_lp(inst), InfeasibleError);
}

TEST(CheckLpFeasible, DetectsViolations) {
  auto f = build_dst_lp(two_path_dst());
  auto s = solve_lp(f);
  auto perturbed = s.values;
  perturbed[static_cast<std::size_t>(f.capacity_var[1])] = 0.0;
  auto zero = std::vector<double>(f.problem.variables.size(), 0.0);
  EXPECT_FALSE(check_lp_feasible(perturbed, f.problem).empty());
  auto issues = check_lp_feasible(zero, f.problem);
  bool demand = false;
  for (const auto& i : issues) demand |= i.find("dem_") != std::string::npos;
  EXPECT_TRUE(demand);
}

TEST(TreeToDcbc, ObjectiveEqualsTreePrize) {
  auto aug = single_element_chain();
  auto f = build_dcbc_lp(aug, 3);
  OutTree full{0, {0, 1}, {{0, 1}}, 3};
  auto s = tree_to_dcbc_solution(full, aug, f, 3);
  EXPECT_TRUE(check_lp_feasible(s, f).empty());
  EXPECT_EQ(s.objective, 7.0);
  auto root_only = tree_to_dcbc_solution(single_node_tree(aug.graph, 0), aug, f, 3);
  EXPECT_EQ(root_only.objective, 0.0);
  EXPECT_TRUE(check_lp_feasible(root_only, f).empty());
  EXPECT_THROW(tree_to_dcbc_solution(full, aug, f, 2), ValidationError);
}

TEST(ScaleDcbcToDst, DoublesHalfCapacities) {
  // r -> a(2) -> w; half a unit routed, delta = 2.
  auto aug = single_element_chain();
  auto f = build_dcbc_lp(aug, 3);
  std::vector<double> x(f.problem.variables.size(), 0.0);
  x[static_cast<std::size_t>(f.capacity_var[1])] = 0.5;
  x[static_cast<std::size_t>(f.capacity_var[2])] = 0.5;
  for (const auto& c : f.commodities) {
    for (const auto& [arc, var] : c.arcs) x[var] = 0.5;
  }
  auto s = make_solution(f, x);
  ASSERT_TRUE(check_lp_feasible(s, f).empty());
  std::vector<NodeId> terms{2};
  auto scaled = scale_dcbc_to_dst_solution(s, f, aug, terms, 2.0);
  EXPECT_TRUE(check_lp_feasible(scaled.solution, scaled.lp).empty());
  EXPECT_LE(scaled.solution.objective, 2.0 * 3 + 1e-9);
  EXPECT_THROW(scale_dcbc_to_dst_solution(s, f, aug, terms, 1.5), ValidationError);
}

TEST(LpFormat, WritesSections) {
  auto text = write_lp_format(build_dst_lp(two_path_dst()).problem);
  EXPECT_NE(text.find("Minimize"), std::string::npos);
  EXPECT_NE(text.find("Subject To"), std::string::npos);
  EXPECT_NE(text.find("dem_3:"), std::string::npos);
  EXPECT_NE(text.find("End"), std::string::npos);
}

}  // namespace
}  // namespace cbc
