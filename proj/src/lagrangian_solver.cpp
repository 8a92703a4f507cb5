#include "crlab/lagrangian_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace crlab {

LagrangianSolveReport solve_lagrangian_tabular(const TabularCmdp& mdp,
                                               const DualState& lambda,
                                               const LagrangianSolveOptions& opts) {
  const int n = mdp.num_states();
  const int m = mdp.num_constraints();
  if (static_cast<int>(lambda.size()) != m)
    throw std::invalid_argument("solve_lagrangian_tabular: multiplier size mismatch");
  if (!(opts.lazy_mix > 0.0 && opts.lazy_mix <= 1.0))
    throw std::invalid_argument("solve_lagrangian_tabular: lazy_mix must be in (0, 1]");

  // Weighted reward per (state, action slot).
  std::vector<std::vector<double>> rl(n);
  for (int s = 0; s < n; ++s) {
    rl[s].resize(mdp.actions(s).size());
    for (std::size_t k = 0; k < rl[s].size(); ++k) {
      double v = mdp.reward(0, s, static_cast<int>(k));
      for (int i = 0; i < m; ++i)
        v += lambda[i] * (mdp.reward(i + 1, s, static_cast<int>(k)) - mdp.thresholds()[i]);
      rl[s][k] = v;
    }
  }

  const double tau = opts.lazy_mix;
  std::vector<double> h(n, 0.0), th(n, 0.0);
  double span = std::numeric_limits<double>::infinity();
  double lo = 0.0, hi = 0.0;
  int sweep = 0;
  for (; sweep < opts.max_sweeps; ++sweep) {
    for (int s = 0; s < n; ++s) {
      double best = -std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < rl[s].size(); ++k) {
        const auto& row = mdp.transition_row(s, static_cast<int>(k));
        double exp_h = 0.0;
        for (int t = 0; t < n; ++t) exp_h += row[t] * h[t];
        const double q = rl[s][k] + tau * exp_h + (1.0 - tau) * h[s];
        if (q > best) best = q;
      }
      th[s] = best;
    }
    lo = std::numeric_limits<double>::infinity();
    hi = -lo;
    for (int s = 0; s < n; ++s) {
      const double d = th[s] - h[s];
      lo = std::min(lo, d);
      hi = std::max(hi, d);
    }
    span = hi - lo;
    const double ref = th[0];
    for (int s = 0; s < n; ++s) h[s] = th[s] - ref;
    if (span <= opts.tol) break;
  }
  if (span > opts.tol)
    throw std::runtime_error("solve_lagrangian_tabular: no convergence in " +
                             std::to_string(opts.max_sweeps) +
                             " sweeps, residual span " + std::to_string(span));

  LagrangianSolveReport report;
  report.gain = 0.5 * (lo + hi);  // the residual brackets the optimal gain
  report.sweeps = sweep + 1;
  report.residual = span;

  // Greedy policy at the converged values, lowest action id on ties.
  std::vector<int> slots(n, 0);
  report.maximizer_multiplicity = false;
  for (int s = 0; s < n; ++s) {
    std::vector<double> q(rl[s].size());
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < q.size(); ++k) {
      const auto& row = mdp.transition_row(s, static_cast<int>(k));
      double exp_h = 0.0;
      for (int t = 0; t < n; ++t) exp_h += row[t] * h[t];
      q[k] = rl[s][k] + tau * exp_h + (1.0 - tau) * h[s];
      best = std::max(best, q[k]);
    }
    int chosen = -1;
    int tied = 0;
    for (std::size_t k = 0; k < q.size(); ++k) {
      if (q[k] >= best - opts.tie_tol) {
        ++tied;
        if (chosen < 0 || mdp.actions(s)[k] < mdp.actions(s)[chosen])
          chosen = static_cast<int>(k);
      }
    }
    slots[s] = chosen;
    if (tied > 1) report.maximizer_multiplicity = true;
  }
  report.policy = TabularPolicy::deterministic(mdp, slots);

  // Differential values of the original chain; the lazy iteration stretches
  // them by 1/lazy_mix.
  report.bias.resize(n);
  for (int s = 0; s < n; ++s) report.bias[s] = tau * (h[s] - h[0]);
  return report;
}

}  // namespace crlab
