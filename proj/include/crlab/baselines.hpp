#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "crlab/continuous_env.hpp"
#include "crlab/executor.hpp"
#include "crlab/rbf_policy.hpp"
#include "crlab/tabular_cmdp.hpp"
#include "crlab/tabular_policy.hpp"

namespace crlab {

/// Classical primal-dual: per epoch, one policy-gradient ascent step on the
/// weighted-reward Lagrangian followed by one dual update. Either step may
/// be zero, which freezes that side of the iteration (the degenerate cases
/// are part of the contract, unlike the executor's strictly positive dual
/// step).
struct PrimalDualConfig {
  double eta_primal = 0.025;
  double eta_dual = 0.0025;
  int t0 = 10;
  int epochs = 40000;
  std::uint64_t seed = 0;
  std::vector<double> lambda0;   // empty means all zeros
  int trace_every = 0;
  int probe_state = -1;          // tabular runs only
  bool record_policies = false;  // tabular runs only
  int occupancy_bins = 25;       // continuous runs only

  void validate(std::size_t num_constraints) const;
};

/// Per-state softmax over admissible action slots; all-zero logits give the
/// uniform policy. This is the parametrization the tabular primal-dual
/// iteration ascends on.
TabularPolicy softmax_policy(const TabularCmdp& mdp,
                             const std::vector<std::vector<double>>& logits);

struct PrimalDualResult {
  ExecReport report;
  std::vector<std::vector<double>> final_logits;
  TabularPolicy final_policy;
};

/// Tabular primal-dual from uniform (zero) logits. The gradient estimate is
/// plain REINFORCE on the epoch's rollout: the weighted return times the
/// summed score of the softmax. Shares the executor's bookkeeping, RNG
/// stream, and report surface, so a run with eta_primal = 0 reproduces
/// execute_acrl on the frozen uniform policy step for step.
PrimalDualResult run_primal_dual(const TabularCmdp& mdp, const PrimalDualConfig& cfg);

/// Continuous variant ascending the RBF policy's parameters in place.
ExecReport run_primal_dual(const ContinuousMonitoringEnv& env, RbfPolicy& policy,
                           const PrimalDualConfig& cfg);

/// Running mean of per-state action laws. The plain observe() weighs every
/// policy equally in every state, giving the entrywise arithmetic mean of
/// the sequence. The weighted overload weighs each state's row by how often
/// that state was actually visited under that policy; this is averaging of
/// occupation measures rather than of conditional laws, and it is the form
/// whose frozen execution reproduces the source run's time averages. (The
/// entrywise mean does not: states a policy parks the agent in are exactly
/// the states where that policy's row deserves more weight.)
class AveragedTabularPolicy {
 public:
  /// Folds one policy in with unit weight in every state.
  void observe(const TabularPolicy& policy);

  /// Folds one policy in, weighing each state's row by state_weights.
  /// Weights must be nonnegative and finite; shapes must match previous
  /// observations.
  void observe(const TabularPolicy& policy, const std::vector<double>& state_weights);

  long long count() const { return count_; }

  /// Weighted mean of everything observed; rows are renormalized against
  /// accumulated rounding before construction. A state whose weights were
  /// all zero falls back to the unweighted mean of its rows. Throws when
  /// nothing was observed.
  TabularPolicy mean() const;

 private:
  std::vector<std::vector<double>> weighted_sums_;
  std::vector<std::vector<double>> plain_sums_;
  std::vector<double> weight_totals_;
  long long count_ = 0;
};

/// Functional form of AveragedTabularPolicy::observe.
AveragedTabularPolicy primal_average_update(AveragedTabularPolicy average,
                                            const TabularPolicy& policy);

/// Folds a recorded maximizer sequence (record_policies executions) into a
/// visit-weighted average, the frozen form of the run.
AveragedTabularPolicy average_maximizer_sequence(const ExecReport& report);

/// When the first multiplier crossed 1, and when the probed policy first
/// reacted. The switch is searched only from the crossing epoch on; absent
/// events stay unset.
struct SwitchTiming {
  std::optional<int> lambda_cross;   // first epoch whose in-force lambda_1 > 1
  std::optional<int> policy_switch;  // first epoch >= cross with stay prob > 1/2

  std::optional<int> delay() const {
    if (!lambda_cross || !policy_switch) return std::nullopt;
    return *policy_switch - *lambda_cross;
  }
};

/// stay_slot is the admissible-slot index at the probed state whose action
/// keeps the agent there. Requires a probe trace.
SwitchTiming switch_timing(const ExecReport& report, int stay_slot);

/// The two methods' timings side by side on matched budgets.
std::pair<SwitchTiming, SwitchTiming> switch_delay_compare(const ExecReport& acrl,
                                                           const ExecReport& primal_dual,
                                                           int stay_slot);

/// Largest value a multiplier component reached over a run, the transient
/// constraint-deficit reading of the dual trace.
double peak_multiplier(const ExecReport& report, std::size_t component);

}  // namespace crlab
