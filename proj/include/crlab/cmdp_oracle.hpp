#pragma once

#include <optional>
#include <string>
#include <vector>

#include "crlab/lagrangian_solver.hpp"
#include "crlab/tabular_cmdp.hpp"
#include "crlab/tabular_policy.hpp"

namespace crlab {

/// Exact solution of the constrained problem via its occupation-measure
/// linear program: variables rho(s, a) >= 0 summing to one, stationary flow
/// at every state, and one row per visitation constraint.
struct CmdpSolution {
  double optimal_value = 0.0;                 // best feasible objective average
  std::vector<std::vector<double>> occupation;  // rho per (state, action slot)
  std::vector<double> state_occupation;         // per-state marginals
  TabularPolicy policy;                         // rho conditioned on the state
  std::vector<bool> uniform_fallback;           // states with no occupation mass
};

struct CmdpLpResult {
  bool feasible = false;
  CmdpSolution solution;             // valid when feasible
  std::string infeasibility_certificate;  // human-readable when not
};

CmdpLpResult solve_cmdp_lp(const TabularCmdp& mdp);

/// d(lambda): the unconstrained optimum of the weighted reward. The weights
/// already subtract the thresholds, so this is the dual function itself.
double dual_function(const TabularCmdp& mdp, const DualState& lambda);

struct StrongDualityOptions {
  double lambda_max = 3.0;
  double grid_step = 0.05;
  double refine_step = 0.001;
};

struct StrongDualityReport {
  double primal_value = 0.0;          // P* from the LP
  double dual_min = 0.0;              // min d(lambda) over the refined grid
  double gap = 0.0;                   // dual_min - primal_value
  std::vector<double> argmin;         // minimizing multiplier
  double worst_weak_duality_margin = 0.0;  // min over the grid of d - P*
  int evaluations = 0;
};

/// Scans d over a multiplier grid, refines once around the argmin, and
/// reports the duality gap. Throws if the constrained problem is infeasible.
StrongDualityReport certify_strong_duality(const TabularCmdp& mdp,
                                           const StrongDualityOptions& opts = {});

struct PrimalRecoveryReport {
  std::vector<double> dual_argmin;    // lambda*
  double dual_value = 0.0;            // d(lambda*)
  double lagrangian_of_primal = 0.0;  // L(pi*, lambda*) with pi* from the LP
  bool primal_is_maximizer = false;   // |L - d| within tolerance

  // A deterministic maximizer of the weighted reward that breaks a
  // constraint, when one exists: the inclusion of the optimal set in the
  // maximizer set is then strict.
  bool strict_inclusion = false;
  std::vector<int> violating_slots;       // policy as one slot per state
  std::vector<double> violating_values;   // its long-run reward averages
  int violated_constraint = -1;
};

/// Certifies that the LP optimum maximizes the weighted reward at lambda*
/// and searches the deterministic policies for a maximizer that violates
/// the constraints. Requires deterministic dynamics for the search.
PrimalRecoveryReport certify_primal_recovery(const TabularCmdp& mdp,
                                             const StrongDualityOptions& opts = {});

}  // namespace crlab
