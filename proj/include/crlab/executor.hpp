#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "crlab/continuous_env.hpp"
#include "crlab/dual_dynamics.hpp"
#include "crlab/lagrangian_solver.hpp"
#include "crlab/rbf_policy.hpp"
#include "crlab/tabular_cmdp.hpp"
#include "crlab/tabular_policy.hpp"

namespace crlab {

/// Knobs of one online execution: K epochs of T0 steps each, with one dual
/// update between epochs. The state is carried across epochs; nothing is
/// ever reset. probe_state and record_policies only apply to tabular runs.
struct ExecConfig {
  double eta_lambda = 0.5;
  int t0 = 10;
  int epochs = 1000;
  std::uint64_t seed = 0;
  std::vector<double> lambda0;  // empty means all zeros
  int trace_every = 0;          // record every n-th trajectory row; 0 = none
  int probe_state = -1;         // tabular: log the policy row here each epoch
  bool record_policies = false; // tabular: keep every epoch's policy
  int occupancy_bins = 25;      // continuous: histogram bins per axis

  void validate(std::size_t num_constraints) const;
};

/// Column-labelled trajectory rows, ready for CSV emission. Tabular runs
/// use columns t, state, action, ...; continuous runs t, x, y, ax, ay, ...
/// followed in both cases by rewards, epoch, multipliers and running
/// averages.
struct TrajectoryTrace {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

struct ExecReport {
  std::vector<EpochRecord> dual_trace;      // lambda_k, epoch mean gaps
  std::vector<double> final_lambda;         // after the last update
  std::vector<double> running_average;      // (1/T) sum of every reward component
  std::vector<double> feasibility_margins;  // running_average[i+1] - c_i
  double slackness_average = 0.0;           // (1/K) sum_k lambda_k . gap_k
  double max_lambda_l1 = 0.0;               // over the whole lambda trace
  std::vector<double> occupancy;            // arrival-state frequencies, row-major
  int occupancy_rows = 0;
  int occupancy_cols = 0;
  std::vector<std::vector<double>> probe_trace;  // per-epoch action law at the probe
  std::vector<TabularPolicy> epoch_policies;     // when record_policies was set
  /// Paired with epoch_policies: how many of the epoch's decisions were
  /// taken in each state. These are the natural weights for averaging the
  /// policy sequence, since occupation measures, not action laws, are what
  /// combine linearly.
  std::vector<std::vector<double>> epoch_state_visits;
  TrajectoryTrace trajectory;
  long long total_steps = 0;
};

/// The policy side of tabular execution: anything that turns the current
/// multipliers into a stationary policy for the epoch.
using LambdaPolicyFn = std::function<TabularPolicy(const std::vector<double>&)>;

/// Solves the weighted-reward problem afresh at each requested lambda.
/// Borrows the environment, which must outlive the returned function.
LambdaPolicyFn exact_maximizer_provider(const TabularCmdp& mdp,
                                        LagrangianSolveOptions options = {});

/// Ignores lambda and always plays the given policy.
LambdaPolicyFn frozen_policy_provider(TabularPolicy policy);

/// Online execution on a finite environment: per epoch, asks policy_for for
/// the policy at the current multipliers, rolls T0 steps, then applies the
/// dual update driven by the epoch's mean constraint gaps.
ExecReport execute_acrl(const TabularCmdp& mdp, const LambdaPolicyFn& policy_for,
                        const ExecConfig& cfg);

/// Online execution on the continuous environment with a trained policy.
/// The multipliers are an input of the policy, so no re-solving happens;
/// actions are sampled from the policy at (state, lambda_k).
ExecReport execute_acrl(const ContinuousMonitoringEnv& env, const RbfPolicy& policy,
                        const ExecConfig& cfg);

struct ProbePoint {
  int epoch;
  std::vector<double> lambda;
  std::vector<double> action_law;  // admissible-slot order at the probe state
};

/// Zips the dual trace with the per-epoch probe rows. Requires a tabular
/// report that was run with probe_state set.
std::vector<ProbePoint> policy_switch_trace(const ExecReport& report);

struct OccupancyGrid {
  int rows = 0;
  int cols = 0;
  std::vector<double> mass;  // row-major, sums to 1
};

/// Extracts the normalized visit histogram and re-checks its normalization.
OccupancyGrid occupancy_histogram(const ExecReport& report);

struct T0SweepRow {
  int t0;
  int epochs;
  long long steps;
  std::vector<double> running_average;
  std::vector<double> feasibility_margins;
};

/// Reruns the same execution at several epoch lengths under a fixed total
/// step budget (base.t0 * base.epochs), exposing the bias a short averaging
/// window induces. Needs at least two distinct t0 values.
std::vector<T0SweepRow> t0_bias_sweep(const TabularCmdp& mdp,
                                      const LambdaPolicyFn& policy_for,
                                      const ExecConfig& base,
                                      const std::vector<int>& t0_values);

/// Radius that the multiplier trace of an execution is expected to respect,
/// certified by any strictly feasible comparison policy: its objective
/// value, its smallest constraint slack, and the dual step and reward bound
/// of the run. Reported violations are tightness warnings, not errors.
double dual_ball_radius(double p_star, double feasible_value, double slack,
                        double eta_lambda, double reward_bound,
                        std::size_t num_constraints);

}  // namespace crlab
