#pragma once

#include <vector>

#include "crlab/dual_dynamics.hpp"
#include "crlab/tabular_cmdp.hpp"
#include "crlab/tabular_policy.hpp"

namespace crlab {

struct LagrangianSolveOptions {
  double tol = 1e-10;      // span tolerance on the value-iteration residual
  int max_sweeps = 100000;
  double tie_tol = 1e-9;   // two actions this close count as tied
  double lazy_mix = 0.5;   // aperiodicity mix toward staying put
};

struct LagrangianSolveReport {
  TabularPolicy policy;         // deterministic, ties broken toward lower action ids
  double gain = 0.0;            // optimal long-run average of the weighted reward
  std::vector<double> bias;     // differential values, bias[reference state 0] = 0
  bool maximizer_multiplicity = false;
  int sweeps = 0;
  double residual = 0.0;        // span of the final Bellman residual
};

/// Maximizes the long-run average of r_0 + sum_i lambda_i (r_i - c_i) by
/// relative value iteration. Iteration runs on the lazy chain
/// p' = lazy_mix * p + (1 - lazy_mix) * I, which has the same average
/// rewards and the same greedy actions but is aperiodic, so the sweep
/// converges on the periodic chains these environments produce. Throws
/// std::runtime_error with the residual if the cap is hit first.
LagrangianSolveReport solve_lagrangian_tabular(const TabularCmdp& mdp,
                                               const DualState& lambda,
                                               const LagrangianSolveOptions& opts = {});

}  // namespace crlab
