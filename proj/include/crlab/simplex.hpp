#pragma once

#include <vector>

namespace crlab {

enum class RowSense { le, ge, eq };

struct LinearConstraint {
  std::vector<double> coeffs;
  RowSense sense;
  double rhs;
};

/// maximize objective . x subject to the rows, x >= 0.
struct LinearProgram {
  std::vector<double> objective;
  std::vector<LinearConstraint> rows;
};

enum class LpStatus { optimal, infeasible, unbounded };

struct LpSolution {
  LpStatus status;
  std::vector<double> x;       // primal point (valid when optimal)
  double objective = 0.0;
  /// Rows whose artificial variable stayed positive after phase one, i.e.
  /// the constraints that cannot be met simultaneously.
  std::vector<int> infeasible_rows;
};

/// Dense two-phase primal simplex. Pivoting uses Bland's rule in both
/// phases, so the method terminates even on degenerate tableaus.
LpSolution solve_lp(const LinearProgram& lp);

}  // namespace crlab
