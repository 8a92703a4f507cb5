#pragma once

#include <vector>

#include "crlab/rng.hpp"
#include "crlab/tabular_cmdp.hpp"

namespace crlab {

/// Stationary stochastic policy on a TabularCmdp. Row s is a distribution
/// over the admissible actions of state s, in the same order as
/// mdp.actions(s). Rows must sum to one within 1e-12.
class TabularPolicy {
 public:
  TabularPolicy() = default;
  explicit TabularPolicy(std::vector<std::vector<double>> probs);

  /// Deterministic policy from one admissible-action slot per state.
  static TabularPolicy deterministic(const TabularCmdp& mdp, const std::vector<int>& slots);

  /// Uniform over admissible actions at every state.
  static TabularPolicy uniform(const TabularCmdp& mdp);

  int num_states() const { return static_cast<int>(probs_.size()); }
  const std::vector<double>& row(int s) const { return probs_.at(s); }

  /// Probability of taking the action with the given id at state s.
  double prob_of(const TabularCmdp& mdp, int s, int action) const;

  /// Samples an action id at state s.
  int sample(const TabularCmdp& mdp, int s, Rng& rng) const;

  /// Slot of the most probable action (lowest slot on ties).
  int argmax_slot(int s) const;

 private:
  std::vector<std::vector<double>> probs_;
};

/// State-to-state transition matrix of the chain induced by the policy.
std::vector<std::vector<double>> policy_chain(const TabularCmdp& mdp,
                                              const TabularPolicy& policy);

/// Unique stationary distribution of the induced chain. Valid for unichain
/// policies; throws std::runtime_error if the linear system is singular
/// (more than one recurrent class).
std::vector<double> stationary_distribution(const TabularCmdp& mdp,
                                            const TabularPolicy& policy);

/// Long-run average of every reward component under the policy, taken over
/// its stationary distribution.
std::vector<double> stationary_reward_average(const TabularCmdp& mdp,
                                              const TabularPolicy& policy);

/// Exact long-run reward averages of a deterministic policy on an
/// environment with deterministic transitions, started at start_state: the
/// trajectory enters a cycle and the averages are taken over that cycle.
std::vector<double> cycle_reward_average(const TabularCmdp& mdp,
                                         const std::vector<int>& slots, int start_state);

/// All deterministic policies as slot vectors (product of admissible sets).
std::vector<std::vector<int>> enumerate_deterministic_policies(const TabularCmdp& mdp);

}  // namespace crlab
