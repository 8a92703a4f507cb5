#include "crlab/simplex.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace crlab {

namespace {

constexpr double kPivotTol = 1e-11;
constexpr double kCostTol = 1e-9;

struct Tableau {
  std::vector<std::vector<double>> a;  // rows x cols, kept in basis form
  std::vector<double> b;               // rhs per row, nonnegative
  std::vector<int> basis;              // basic column per row
  std::vector<bool> enterable;         // artificials are barred in phase two

  int rows() const { return static_cast<int>(a.size()); }
  int cols() const { return a.empty() ? 0 : static_cast<int>(a.front().size()); }

  void pivot(int prow, int pcol) {
    const double p = a[prow][pcol];
    for (double& v : a[prow]) v /= p;
    b[prow] /= p;
    for (int r = 0; r < rows(); ++r) {
      if (r == prow) continue;
      const double f = a[r][pcol];
      if (f == 0.0) continue;
      for (int c = 0; c < cols(); ++c) a[r][c] -= f * a[prow][c];
      b[r] -= f * b[prow];
      if (b[r] < 0.0 && b[r] > -1e-12) b[r] = 0.0;
    }
    basis[prow] = pcol;
  }
};

// Runs Bland-rule simplex on the tableau for the given objective
// (maximization). Returns false if an unbounded ray is found.
bool run_simplex(Tableau& t, const std::vector<double>& cost) {
  while (true) {
    // Reduced cost of column j is cost_j - cost_B . a_j.
    int enter = -1;
    for (int j = 0; j < t.cols(); ++j) {
      if (!t.enterable[j]) continue;
      double z = 0.0;
      for (int r = 0; r < t.rows(); ++r) z += cost[t.basis[r]] * t.a[r][j];
      if (cost[j] - z > kCostTol) {
        enter = j;  // Bland: lowest improving index
        break;
      }
    }
    if (enter < 0) return true;

    int leave = -1;
    double best_ratio = std::numeric_limits<double>::infinity();
    for (int r = 0; r < t.rows(); ++r) {
      if (t.a[r][enter] <= kPivotTol) continue;
      const double ratio = t.b[r] / t.a[r][enter];
      if (ratio < best_ratio - 1e-12 ||
          (std::abs(ratio - best_ratio) <= 1e-12 &&
           (leave < 0 || t.basis[r] < t.basis[leave]))) {
        best_ratio = ratio;
        leave = r;
      }
    }
    if (leave < 0) return false;
    t.pivot(leave, enter);
  }
}

}  // namespace

LpSolution solve_lp(const LinearProgram& lp) {
  const int n = static_cast<int>(lp.objective.size());
  const int m = static_cast<int>(lp.rows.size());
  for (const auto& row : lp.rows)
    if (static_cast<int>(row.coeffs.size()) != n)
      throw std::invalid_argument("solve_lp: row width does not match objective");

  // Count auxiliary columns: one slack or surplus per inequality, one
  // artificial per equality or ge row (and per le row with negative rhs,
  // which normalization turns into ge).
  struct RowPlan {
    std::vector<double> coeffs;
    RowSense sense;
    double rhs;
  };
  std::vector<RowPlan> plan(m);
  for (int i = 0; i < m; ++i) {
    plan[i].coeffs = lp.rows[i].coeffs;
    plan[i].sense = lp.rows[i].sense;
    plan[i].rhs = lp.rows[i].rhs;
    if (plan[i].rhs < 0.0) {
      for (double& v : plan[i].coeffs) v = -v;
      plan[i].rhs = -plan[i].rhs;
      if (plan[i].sense == RowSense::le)
        plan[i].sense = RowSense::ge;
      else if (plan[i].sense == RowSense::ge)
        plan[i].sense = RowSense::le;
    }
  }

  int slack_count = 0, artificial_count = 0;
  for (const auto& row : plan) {
    if (row.sense != RowSense::eq) ++slack_count;
    if (row.sense != RowSense::le) ++artificial_count;
  }
  const int total = n + slack_count + artificial_count;

  Tableau t;
  t.a.assign(m, std::vector<double>(total, 0.0));
  t.b.resize(m);
  t.basis.assign(m, -1);
  t.enterable.assign(total, true);

  std::vector<int> artificial_row;  // constraint index per artificial column
  int next_slack = n;
  int next_artificial = n + slack_count;
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) t.a[i][j] = plan[i].coeffs[j];
    t.b[i] = plan[i].rhs;
    if (plan[i].sense == RowSense::le) {
      t.a[i][next_slack] = 1.0;
      t.basis[i] = next_slack++;
    } else if (plan[i].sense == RowSense::ge) {
      t.a[i][next_slack] = -1.0;
      ++next_slack;
      t.a[i][next_artificial] = 1.0;
      t.basis[i] = next_artificial++;
      artificial_row.push_back(i);
    } else {
      t.a[i][next_artificial] = 1.0;
      t.basis[i] = next_artificial++;
      artificial_row.push_back(i);
    }
  }

  LpSolution out;

  // Phase one: drive the artificials to zero.
  if (artificial_count > 0) {
    std::vector<double> cost(total, 0.0);
    for (int j = n + slack_count; j < total; ++j) cost[j] = -1.0;
    run_simplex(t, cost);  // bounded by construction

    double infeasibility = 0.0;
    for (int r = 0; r < t.rows(); ++r)
      if (t.basis[r] >= n + slack_count) infeasibility += t.b[r];
    if (infeasibility > 1e-9) {
      out.status = LpStatus::infeasible;
      for (int r = 0; r < t.rows(); ++r)
        if (t.basis[r] >= n + slack_count && t.b[r] > 1e-9)
          out.infeasible_rows.push_back(artificial_row[t.basis[r] - n - slack_count]);
      return out;
    }

    // Pivot degenerate artificials out of the basis where possible.
    for (int r = 0; r < t.rows(); ++r) {
      if (t.basis[r] < n + slack_count) continue;
      int pcol = -1;
      for (int j = 0; j < n + slack_count; ++j)
        if (std::abs(t.a[r][j]) > kPivotTol) {
          pcol = j;
          break;
        }
      if (pcol >= 0) t.pivot(r, pcol);
      // Otherwise the row is redundant; its artificial stays basic at zero
      // and the barred costs below keep it from mattering.
    }
    for (int j = n + slack_count; j < total; ++j) t.enterable[j] = false;
  }

  // Phase two: the real objective.
  std::vector<double> cost(total, 0.0);
  for (int j = 0; j < n; ++j) cost[j] = lp.objective[j];
  if (!run_simplex(t, cost)) {
    out.status = LpStatus::unbounded;
    return out;
  }

  out.status = LpStatus::optimal;
  out.x.assign(n, 0.0);
  for (int r = 0; r < t.rows(); ++r)
    if (t.basis[r] < n) out.x[t.basis[r]] = t.b[r];
  out.objective = 0.0;
  for (int j = 0; j < n; ++j) out.objective += lp.objective[j] * out.x[j];
  return out;
}

}  // namespace crlab
