// Bounded-variable primal simplex on a sparse-aware dense tableau.
//
// Sized for desk-scale flow relaxations (a few thousand columns). Each row
// operation only touches the nonzero entries of the pivot row, which keeps
// flow-structured tableaus cheap to update.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "cbc/error.hpp"

namespace cbc::lp {

enum class Sense { kLessEqual, kEqual, kGreaterEqual };
enum class Objective { kMinimize, kMaximize };
enum class Status { kOptimal, kInfeasible, kUnbounded, kIterationLimit };

inline const char* to_string(Status s) {
  switch (s) {
    case Status::kOptimal: return "optimal";
    case Status::kInfeasible: return "infeasible";
    case Status::kUnbounded: return "unbounded";
    case Status::kIterationLimit: return "iteration-limit";
  }
  return "unknown";
}

struct Variable {
  std::string name;
  double lower = 0.0;
  double upper = 1.0;
  double objective = 0.0;
};

struct Term {
  std::size_t var;
  double coef;
};

struct Row {
  std::string name;
  std::vector<Term> terms;
  Sense sense = Sense::kLessEqual;
  double rhs = 0.0;
};

struct LpProblem {
  Objective objective = Objective::kMaximize;
  std::vector<Variable> variables;
  std::vector<Row> rows;

  std::size_t add_variable(std::string name, double lower, double upper,
                           double objective_coef) {
    variables.push_back({std::move(name), lower, upper, objective_coef});
    return variables.size() - 1;
  }

  std::size_t add_row(std::string name, std::vector<Term> terms, Sense sense,
                      double rhs) {
    for (const auto& t : terms) {
      if (t.var >= variables.size()) {
        throw ValidationError("row " + name + " references an unknown variable");
      }
    }
    rows.push_back({std::move(name), std::move(terms), sense, rhs});
    return rows.size() - 1;
  }

  double objective_value(const std::vector<double>& x) const {
    double total = 0.0;
    for (std::size_t j = 0; j < variables.size(); ++j) {
      total += variables[j].objective * x.at(j);
    }
    return total;
  }
};

struct SolverOptions {
  double feasibility_tol = 1e-9;
  double optimality_tol = 1e-9;
  double pivot_tol = 1e-9;
  std::size_t max_iterations = 200000;
  // Consecutive degenerate pivots before switching to Bland's rule.
  std::size_t degenerate_switch = 50;
};

struct SolveResult {
  Status status = Status::kOptimal;
  std::vector<double> values;
  double objective = 0.0;
  std::size_t iterations = 0;
};

namespace detail {

class Tableau {
 public:
  Tableau(const LpProblem& p, const SolverOptions& opt) : opt_(opt) {
    m_ = p.rows.size();
    n_struct_ = p.variables.size();
    // Columns: structurals, one slack per row, artificials appended later.
    std::vector<double> lower, upper;
    for (const auto& v : p.variables) {
      if (v.lower > v.upper) {
        infeasible_bounds_ = true;
      }
      lower.push_back(v.lower);
      upper.push_back(v.upper);
    }
    for (const auto& r : p.rows) {
      switch (r.sense) {
        case Sense::kLessEqual:
          lower.push_back(0.0);
          upper.push_back(kInf);
          break;
        case Sense::kGreaterEqual:
          lower.push_back(-kInf);
          upper.push_back(0.0);
          break;
        case Sense::kEqual:
          lower.push_back(0.0);
          upper.push_back(0.0);
          break;
      }
    }
    // Nonbasic structurals start at a finite bound.
    std::vector<double> x(n_struct_ + m_, 0.0);
    for (std::size_t j = 0; j < n_struct_; ++j) {
      x[j] = std::isfinite(lower[j]) ? lower[j] : upper[j];
      if (!std::isfinite(x[j])) x[j] = 0.0;
    }
    std::vector<double> residual(m_, 0.0);
    for (std::size_t i = 0; i < m_; ++i) {
      double activity = 0.0;
      for (const auto& t : p.rows[i].terms) activity += t.coef * x[t.var];
      residual[i] = p.rows[i].rhs - activity;
    }
    // Decide which rows need an artificial.
    std::vector<std::size_t> art_rows;
    for (std::size_t i = 0; i < m_; ++i) {
      const std::size_t s = n_struct_ + i;
      if (residual[i] < lower[s] - opt_.feasibility_tol ||
          residual[i] > upper[s] + opt_.feasibility_tol) {
        art_rows.push_back(i);
      }
    }
    n_ = n_struct_ + m_ + art_rows.size();
    width_ = n_ + 1;  // last column holds basic values
    cells_.assign((m_ + 1) * width_, 0.0);
    lower_ = lower;
    upper_ = upper;
    lower_.resize(n_, 0.0);
    upper_.resize(n_, kInf);
    value_ = x;
    value_.resize(n_, 0.0);
    at_upper_.assign(n_, false);
    for (std::size_t j = 0; j < n_struct_; ++j) {
      at_upper_[j] = !std::isfinite(lower_[j]);
    }
    basis_.assign(m_, 0);
    is_basic_.assign(n_, false);

    std::vector<double> art_sign(m_, 0.0);
    std::size_t next_art = n_struct_ + m_;
    for (std::size_t i : art_rows) {
      const std::size_t s = n_struct_ + i;
      // Slack sits at the bound nearest to the residual.
      double slack_value = residual[i] < lower_[s] ? lower_[s] : upper_[s];
      value_[s] = slack_value;
      at_upper_[s] = residual[i] > upper_[s];
      double remainder = residual[i] - slack_value;
      art_sign[i] = remainder >= 0.0 ? 1.0 : -1.0;
      basis_[i] = next_art;
      value_[next_art] = std::abs(remainder);
      ++next_art;
    }
    std::size_t art_cursor = n_struct_ + m_;
    std::vector<bool> has_art(m_, false);
    for (std::size_t i : art_rows) has_art[i] = true;
    for (std::size_t i = 0; i < m_; ++i) {
      double* row = row_ptr(i);
      // Row i: a_i x + s_i (+ sign * art_i) = b_i, expressed in terms of its
      // basic variable. With an artificial basic, divide by its sign.
      double scale = has_art[i] ? art_sign[i] : 1.0;
      for (const auto& t : p.rows[i].terms) row[t.var] += t.coef / scale;
      row[n_struct_ + i] = 1.0 / scale;
      if (has_art[i]) {
        row[art_cursor] = 1.0;
        ++art_cursor;
      } else {
        basis_[i] = n_struct_ + i;
        value_[n_struct_ + i] = residual[i];
      }
      row[n_] = value_[basis_[i]];
      is_basic_[basis_[i]] = true;
    }
    first_art_ = n_struct_ + m_;
  }

  SolveResult solve(const LpProblem& p) {
    SolveResult result;
    if (infeasible_bounds_) {
      result.status = Status::kInfeasible;
      return result;
    }
    if (n_ > first_art_) {
      // Phase 1: minimize the sum of artificials.
      std::vector<double> cost(n_, 0.0);
      for (std::size_t j = first_art_; j < n_; ++j) cost[j] = 1.0;
      load_objective(cost);
      Status s = iterate(result.iterations, /*allow_artificials=*/true);
      if (s == Status::kIterationLimit) {
        result.status = s;
        return result;
      }
      double infeas = 0.0;
      for (std::size_t j = first_art_; j < n_; ++j) infeas += value_[j];
      if (infeas > 1e-7) {
        result.status = Status::kInfeasible;
        return result;
      }
      drive_out_artificials();
      for (std::size_t j = first_art_; j < n_; ++j) {
        upper_[j] = 0.0;
        if (!is_basic_[j]) value_[j] = 0.0;
      }
    }
    std::vector<double> cost(n_, 0.0);
    const double sign = p.objective == Objective::kMaximize ? -1.0 : 1.0;
    for (std::size_t j = 0; j < n_struct_; ++j) {
      cost[j] = sign * p.variables[j].objective;
    }
    load_objective(cost);
    Status s = iterate(result.iterations, /*allow_artificials=*/false);
    result.status = s;
    result.values.assign(value_.begin(), value_.begin() + n_struct_);
    for (std::size_t j = 0; j < n_struct_; ++j) {
      // Snap round-off onto the bounds.
      double& v = result.values[j];
      if (std::abs(v - lower_[j]) < 1e-11) v = lower_[j];
      if (std::abs(v - upper_[j]) < 1e-11) v = upper_[j];
    }
    result.objective = p.objective_value(result.values);
    return result;
  }

 private:
  static constexpr double kInf = std::numeric_limits<double>::infinity();

  double* row_ptr(std::size_t i) { return cells_.data() + i * width_; }

  void load_objective(const std::vector<double>& cost) {
    double* obj = row_ptr(m_);
    std::fill(obj, obj + width_, 0.0);
    for (std::size_t j = 0; j < n_; ++j) obj[j] = cost[j];
    for (std::size_t i = 0; i < m_; ++i) {
      double cb = cost[basis_[i]];
      if (cb == 0.0) continue;
      const double* row = row_ptr(i);
      for (std::size_t j = 0; j < n_; ++j) {
        if (row[j] != 0.0) obj[j] -= cb * row[j];
      }
    }
    for (std::size_t i = 0; i < m_; ++i) obj[basis_[i]] = 0.0;
  }

  // Entering candidate: improving direction for a nonbasic column.
  int direction(std::size_t j, double d) const {
    if (is_basic_[j]) return 0;
    if (upper_[j] - lower_[j] <= 0.0) return 0;  // fixed
    const double tol = opt_.optimality_tol;
    if (!at_upper_[j] && d < -tol && upper_[j] > value_[j]) return +1;
    if (at_upper_[j] && d > tol && lower_[j] < value_[j]) return -1;
    if (!at_upper_[j] && d > tol && !std::isfinite(lower_[j])) return -1;
    return 0;
  }

  Status iterate(std::size_t& iterations, bool allow_artificials) {
    std::size_t degenerate_run = 0;
    std::vector<std::size_t> pivot_nz;
    pivot_nz.reserve(width_);
    const std::size_t limit_col = allow_artificials ? n_ : first_art_;
    while (true) {
      if (iterations >= opt_.max_iterations) return Status::kIterationLimit;
      const double* obj = row_ptr(m_);
      const bool bland = degenerate_run >= opt_.degenerate_switch;
      std::size_t enter = n_;
      int dir = 0;
      double best = 0.0;
      for (std::size_t j = 0; j < limit_col; ++j) {
        int dj = direction(j, obj[j]);
        if (dj == 0) continue;
        if (bland) {
          enter = j;
          dir = dj;
          break;
        }
        double score = std::abs(obj[j]);
        if (score > best) {
          best = score;
          enter = j;
          dir = dj;
        }
      }
      if (enter == n_) return Status::kOptimal;

      // Ratio test.
      double theta = upper_[enter] - lower_[enter];  // bound flip
      std::size_t leave_row = m_;
      bool leave_to_upper = false;
      double best_pivot = 0.0;
      for (std::size_t i = 0; i < m_; ++i) {
        double a = row_ptr(i)[enter];
        if (std::abs(a) <= opt_.pivot_tol) continue;
        // Basic value moves by -dir * a * step.
        double rate = -dir * a;
        std::size_t b = basis_[i];
        double limit;
        bool to_upper;
        if (rate > 0.0) {
          if (!std::isfinite(upper_[b])) continue;
          limit = (upper_[b] - value_[b]) / rate;
          to_upper = true;
        } else {
          if (!std::isfinite(lower_[b])) continue;
          limit = (lower_[b] - value_[b]) / rate;
          to_upper = false;
        }
        if (limit < 0.0) limit = 0.0;
        bool take = false;
        if (limit < theta - 1e-12) {
          take = true;
        } else if (limit <= theta + 1e-12 && leave_row < m_) {
          if (bland) {
            take = b < basis_[leave_row];
          } else {
            take = std::abs(a) > best_pivot;
          }
        }
        if (take) {
          theta = limit;
          leave_row = i;
          leave_to_upper = to_upper;
          best_pivot = std::abs(a);
        }
      }
      if (!std::isfinite(theta)) return Status::kUnbounded;
      ++iterations;
      degenerate_run = theta <= 1e-12 ? degenerate_run + 1 : 0;

      // Move values.
      const double step = dir * theta;
      if (step != 0.0) {
        for (std::size_t i = 0; i < m_; ++i) {
          double a = row_ptr(i)[enter];
          if (a != 0.0) value_[basis_[i]] -= a * step;
        }
        value_[enter] += step;
      }
      if (leave_row == m_) {
        // Bound flip, basis unchanged.
        at_upper_[enter] = dir > 0;
        value_[enter] = at_upper_[enter] ? upper_[enter] : lower_[enter];
        continue;
      }
      const std::size_t leave = basis_[leave_row];
      value_[leave] = leave_to_upper ? upper_[leave] : lower_[leave];
      at_upper_[leave] = leave_to_upper;
      pivot(leave_row, enter, pivot_nz);
      is_basic_[leave] = false;
      is_basic_[enter] = true;
      basis_[leave_row] = enter;
    }
  }

  void pivot(std::size_t r, std::size_t c, std::vector<std::size_t>& nz) {
    double* prow = row_ptr(r);
    const double inv = 1.0 / prow[c];
    nz.clear();
    for (std::size_t j = 0; j < n_; ++j) {
      if (prow[j] != 0.0) {
        prow[j] *= inv;
        nz.push_back(j);
      }
    }
    prow[c] = 1.0;
    for (std::size_t i = 0; i <= m_; ++i) {
      if (i == r) continue;
      double* row = row_ptr(i);
      const double f = row[c];
      if (f == 0.0) continue;
      for (std::size_t j : nz) {
        double v = row[j] - f * prow[j];
        row[j] = std::abs(v) < 1e-13 ? 0.0 : v;
      }
      row[c] = 0.0;
    }
  }

  // Pivots zero-valued artificials out of the basis where possible.
  void drive_out_artificials() {
    std::vector<std::size_t> nz;
    for (std::size_t i = 0; i < m_; ++i) {
      if (basis_[i] < first_art_) continue;
      const double* row = row_ptr(i);
      std::size_t best = n_;
      double mag = opt_.pivot_tol;
      for (std::size_t j = 0; j < first_art_; ++j) {
        if (!is_basic_[j] && std::abs(row[j]) > mag) {
          mag = std::abs(row[j]);
          best = j;
        }
      }
      if (best == n_) continue;  // redundant row; artificial stays at zero
      std::size_t leave = basis_[i];
      pivot(i, best, nz);
      is_basic_[leave] = false;
      is_basic_[best] = true;
      basis_[i] = best;
      value_[leave] = 0.0;
    }
  }

  SolverOptions opt_;
  std::size_t m_ = 0, n_struct_ = 0, n_ = 0, width_ = 0, first_art_ = 0;
  std::vector<double> cells_;
  std::vector<double> lower_, upper_, value_;
  std::vector<bool> at_upper_, is_basic_;
  std::vector<std::size_t> basis_;
  bool infeasible_bounds_ = false;
};

}  // namespace detail

/// Solves p; values are primal-feasible within the solver tolerances when the
/// status is kOptimal.
inline SolveResult solve(const LpProblem& p, const SolverOptions& opt = {}) {
  if (p.variables.empty()) {
    SolveResult r;
    r.status = Status::kOptimal;
    for (const auto& row : p.rows) {
      bool ok = (row.sense == Sense::kLessEqual && row.rhs >= -opt.feasibility_tol) ||
                (row.sense == Sense::kGreaterEqual && row.rhs <= opt.feasibility_tol) ||
                (row.sense == Sense::kEqual && std::abs(row.rhs) <= opt.feasibility_tol);
      if (!ok) r.status = Status::kInfeasible;
    }
    return r;
  }
  detail::Tableau tableau(p, opt);
  return tableau.solve(p);
}

}  // namespace cbc::lp
