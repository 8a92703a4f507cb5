#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "crlab/continuous_env.hpp"
#include "crlab/executor.hpp"
#include "crlab/lagrangian_solver.hpp"
#include "crlab/rbf_policy.hpp"
#include "crlab/rng.hpp"
#include "crlab/tabular_cmdp.hpp"

namespace crlab {

/// Hyperparameters for multiplier-conditioned policy training. Each
/// iteration is one fixed-horizon rollout at a freshly sampled start state
/// and multiplier vector; theta moves once per batch.
struct TrainConfig {
  enum class Baseline { none, mean_subtraction };

  long long iterations = 50000;
  int horizon = 20;
  double eta_theta = 0.001;
  /// Multipliers are sampled uniformly from [0, lambda_max]^m per rollout
  /// and held fixed for the whole rollout.
  double lambda_max = 5.0;
  int batch = 10;
  Baseline baseline = Baseline::mean_subtraction;
  std::uint64_t seed = 0;
  /// Curve sampling cadence in iterations; 0 disables the curve.
  long long curve_every = 1000;

  void validate() const;
};

struct CurvePoint {
  long long iteration = 0;
  double mean_augmented_return = 0.0;
  double theta_norm = 0.0;
};

struct TrainReport {
  std::vector<double> theta;
  std::vector<CurvePoint> curve;
  long long iterations_run = 0;
  /// For console reporting only; deterministic artifacts must not carry it.
  double wall_clock_seconds = 0.0;
};

/// Start state uniform over the arena, multipliers uniform over the box.
/// The state is drawn first, then the multiplier components in order.
void sample_augmented_start(Rng& rng, const ContinuousMonitoringEnv& env,
                            double lambda_max, Vec2& state,
                            std::vector<double>& lambda);

/// Tabular variant: the start state is the environment's fixed start.
void sample_augmented_start(Rng& rng, const TabularCmdp& mdp, double lambda_max,
                            int& state, std::vector<double>& lambda);

/// One rollout's sufficient statistics for the policy-gradient update: the
/// weighted return G = sum_t r_lambda(s_t, a_t) and the summed score
/// function, laid out like theta.
struct RolloutSample {
  double return_value = 0.0;
  std::vector<double> score_sum;
};

RolloutSample rollout_augmented(const ContinuousMonitoringEnv& env,
                                const RbfPolicy& policy, const Vec2& start,
                                const std::vector<double>& lambda, int horizon,
                                Rng& rng);

/// REINFORCE on the finite-horizon weighted return, parameters updated once
/// per batch:
///
///   theta += eta_theta * (1/B) * sum_b (G_b - baseline) * score_b
///
/// where the baseline is the batch mean of G (or zero). Aborts with a
/// diagnostic if the parameter norm passes 1e6. iterations = 0 is a no-op.
TrainReport train_acrl(const ContinuousMonitoringEnv& env, RbfPolicy& policy,
                       const TrainConfig& cfg);

/// Shared per-dimension lattice over the multiplier box, dimension 0
/// slowest in the flat index.
struct LambdaGrid {
  std::vector<double> axis;  // ascending
  int dims = 0;

  /// Points 0, resolution, 2*resolution, ... up to lambda_max.
  static LambdaGrid uniform(double lambda_max, double resolution, int dims);

  std::size_t size() const;
  std::vector<double> point(std::size_t index) const;
  /// Componentwise nearest lattice point (ties toward the lower value).
  std::size_t nearest(const std::vector<double>& lambda) const;
};

/// Exact maximizers tabulated over a multiplier lattice. For tabular
/// environments this table *is* the trained policy: lookups take the
/// nearest lattice point.
struct TabularPolicyTable {
  LambdaGrid grid;
  std::vector<LagrangianSolveReport> reports;
};

TabularPolicyTable solve_tabular_training(const TabularCmdp& mdp, const LambdaGrid& grid,
                                          const LagrangianSolveOptions& opts = {});

/// Adapts a solved table to the executor's policy provider interface.
LambdaPolicyFn grid_policy_provider(TabularPolicyTable table);

}  // namespace crlab
