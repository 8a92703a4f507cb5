#include "crlab/cmdp_oracle.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

#include "crlab/simplex.hpp"

namespace crlab {

namespace {

constexpr double kZeroMass = 1e-12;

// Flattened variable layout: one column per (state, admissible slot).
struct VarLayout {
  std::vector<int> offset;
  int total = 0;

  explicit VarLayout(const TabularCmdp& mdp) {
    offset.resize(mdp.num_states());
    for (int s = 0; s < mdp.num_states(); ++s) {
      offset[s] = total;
      total += static_cast<int>(mdp.actions(s).size());
    }
  }
  int index(int s, int slot) const { return offset[s] + slot; }
};

void for_each_grid_point(const std::vector<double>& lo, const std::vector<double>& hi,
                         double step,
                         const std::function<void(const std::vector<double>&)>& fn) {
  const std::size_t m = lo.size();
  std::vector<int> counts(m);
  for (std::size_t i = 0; i < m; ++i)
    counts[i] = static_cast<int>(std::floor((hi[i] - lo[i]) / step + 1e-9)) + 1;
  std::vector<int> idx(m, 0);
  std::vector<double> point(m);
  while (true) {
    for (std::size_t i = 0; i < m; ++i) point[i] = lo[i] + step * idx[i];
    fn(point);
    std::size_t d = 0;
    while (d < m) {
      if (++idx[d] < counts[d]) break;
      idx[d] = 0;
      ++d;
    }
    if (d == m) break;
  }
}

}  // namespace

CmdpLpResult solve_cmdp_lp(const TabularCmdp& mdp) {
  const int n = mdp.num_states();
  const int m = mdp.num_constraints();
  const VarLayout vars(mdp);

  LinearProgram lp;
  lp.objective.assign(vars.total, 0.0);
  for (int s = 0; s < n; ++s)
    for (std::size_t k = 0; k < mdp.actions(s).size(); ++k)
      lp.objective[vars.index(s, static_cast<int>(k))] = mdp.reward(0, s, static_cast<int>(k));

  std::vector<std::string> row_labels;

  // Total occupation mass is one.
  lp.rows.push_back({std::vector<double>(vars.total, 1.0), RowSense::eq, 1.0});
  row_labels.push_back("normalization");

  // Stationarity at every state but the last; that row is the sum of the
  // others and would only add degeneracy.
  for (int target = 0; target < n - 1; ++target) {
    std::vector<double> row(vars.total, 0.0);
    for (std::size_t k = 0; k < mdp.actions(target).size(); ++k)
      row[vars.index(target, static_cast<int>(k))] += 1.0;
    for (int s = 0; s < n; ++s)
      for (std::size_t k = 0; k < mdp.actions(s).size(); ++k)
        row[vars.index(s, static_cast<int>(k))] -=
            mdp.transition_row(s, static_cast<int>(k))[target];
    lp.rows.push_back({std::move(row), RowSense::eq, 0.0});
    row_labels.push_back("flow[state " + std::to_string(target) + "]");
  }

  for (int i = 0; i < m; ++i) {
    std::vector<double> row(vars.total, 0.0);
    for (int s = 0; s < n; ++s)
      for (std::size_t k = 0; k < mdp.actions(s).size(); ++k)
        row[vars.index(s, static_cast<int>(k))] = mdp.reward(i + 1, s, static_cast<int>(k));
    lp.rows.push_back({std::move(row), RowSense::ge, mdp.thresholds()[i]});
    row_labels.push_back("constraint[" + std::to_string(i + 1) + "]");
  }

  const auto lp_out = solve_lp(lp);
  CmdpLpResult result;
  if (lp_out.status == LpStatus::infeasible) {
    result.feasible = false;
    std::string cert = "no feasible policy; unsatisfiable rows:";
    for (int r : lp_out.infeasible_rows) cert += " " + row_labels[r];
    result.infeasibility_certificate = cert;
    return result;
  }
  if (lp_out.status != LpStatus::optimal)
    throw std::runtime_error("solve_cmdp_lp: occupation LP should be bounded");

  result.feasible = true;
  auto& sol = result.solution;
  sol.optimal_value = lp_out.objective;
  sol.occupation.resize(n);
  sol.state_occupation.assign(n, 0.0);
  sol.uniform_fallback.assign(n, false);
  std::vector<std::vector<double>> probs(n);
  for (int s = 0; s < n; ++s) {
    const int na = static_cast<int>(mdp.actions(s).size());
    sol.occupation[s].resize(na);
    for (int k = 0; k < na; ++k) {
      double v = lp_out.x[vars.index(s, k)];
      if (v < 0.0 && v > -kZeroMass) v = 0.0;
      sol.occupation[s][k] = v;
      sol.state_occupation[s] += v;
    }
    if (sol.state_occupation[s] <= kZeroMass) {
      probs[s].assign(na, 1.0 / na);
      sol.uniform_fallback[s] = true;
    } else {
      probs[s].resize(na);
      double row_total = 0.0;
      for (int k = 0; k < na; ++k) row_total += sol.occupation[s][k];
      for (int k = 0; k < na; ++k) probs[s][k] = sol.occupation[s][k] / row_total;
    }
  }
  sol.policy = TabularPolicy(std::move(probs));
  return result;
}

double dual_function(const TabularCmdp& mdp, const DualState& lambda) {
  return solve_lagrangian_tabular(mdp, lambda).gain;
}

StrongDualityReport certify_strong_duality(const TabularCmdp& mdp,
                                           const StrongDualityOptions& opts) {
  const auto lp = solve_cmdp_lp(mdp);
  if (!lp.feasible)
    throw std::runtime_error("certify_strong_duality: " + lp.infeasibility_certificate);

  const int m = mdp.num_constraints();
  StrongDualityReport report;
  report.primal_value = lp.solution.optimal_value;

  double best = std::numeric_limits<double>::infinity();
  double worst_margin = std::numeric_limits<double>::infinity();
  std::vector<double> best_point(m, 0.0);
  int evals = 0;
  const auto visit = [&](const std::vector<double>& point) {
    const double d = dual_function(mdp, DualState{point});
    ++evals;
    worst_margin = std::min(worst_margin, d - report.primal_value);
    if (d < best) {
      best = d;
      best_point = point;
    }
  };

  for_each_grid_point(std::vector<double>(m, 0.0), std::vector<double>(m, opts.lambda_max),
                      opts.grid_step, visit);

  // One refinement pass in a coarse-step box around the argmin.
  std::vector<double> lo(m), hi(m);
  for (int i = 0; i < m; ++i) {
    lo[i] = std::max(0.0, best_point[i] - opts.grid_step);
    hi[i] = std::min(opts.lambda_max, best_point[i] + opts.grid_step);
  }
  for_each_grid_point(lo, hi, opts.refine_step, visit);

  report.dual_min = best;
  report.argmin = best_point;
  report.gap = best - report.primal_value;
  report.worst_weak_duality_margin = worst_margin;
  report.evaluations = evals;
  return report;
}

PrimalRecoveryReport certify_primal_recovery(const TabularCmdp& mdp,
                                             const StrongDualityOptions& opts) {
  const auto lp = solve_cmdp_lp(mdp);
  if (!lp.feasible)
    throw std::runtime_error("certify_primal_recovery: " + lp.infeasibility_certificate);
  const auto duality = certify_strong_duality(mdp, opts);

  PrimalRecoveryReport report;
  report.dual_argmin = duality.argmin;
  report.dual_value = duality.dual_min;

  // L(pi*, lambda*) evaluated at the LP occupation measure, which is
  // stationary for pi* by the flow rows.
  const DualState lambda_star{duality.argmin};
  std::vector<double> v(mdp.num_constraints() + 1, 0.0);
  for (int s = 0; s < mdp.num_states(); ++s) {
    const auto r = mdp.state_reward(s);
    for (std::size_t i = 0; i < v.size(); ++i)
      v[i] += lp.solution.state_occupation[s] * r[i];
  }
  report.lagrangian_of_primal = lagrangian_reward(v, lambda_star, mdp.thresholds());
  report.primal_is_maximizer =
      std::abs(report.lagrangian_of_primal - report.dual_value) < 1e-9;

  if (mdp.deterministic_dynamics()) {
    for (const auto& slots : enumerate_deterministic_policies(mdp)) {
      const auto avg = cycle_reward_average(mdp, slots, mdp.start_state());
      const double gain = lagrangian_reward(avg, lambda_star, mdp.thresholds());
      if (std::abs(gain - report.dual_value) > 1e-9) continue;  // not a maximizer
      for (int i = 0; i < mdp.num_constraints(); ++i) {
        if (avg[i + 1] < mdp.thresholds()[i] - 1e-9) {
          report.strict_inclusion = true;
          report.violating_slots = slots;
          report.violating_values = avg;
          report.violated_constraint = i + 1;
          break;
        }
      }
      if (report.strict_inclusion) break;
    }
  }
  return report;
}

}  // namespace crlab
