#pragma once

#include <stdexcept>
#include <string>

namespace cbc {

/// Malformed input: broken invariants, dangling references, bad schema.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The instance admits no solution (unreachable terminal, root over budget,
/// infeasible LP, uncoverable element).
class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The embedded LP solver stopped without an optimal basis.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace cbc
