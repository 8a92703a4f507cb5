#pragma once

#include <string>
#include <vector>

#include "crlab/reward_vector.hpp"
#include "crlab/rng.hpp"

namespace crlab {

/// Finite constrained MDP with per-state admissible action sets.
///
/// Transitions are stored as one row-stochastic row per (state, admissible
/// action). Reward tables are stored per (state, action) slot but must be
/// functions of the state alone: that is what both built-in environments
/// use, and it is what lets step() report the reward of the state it lands
/// in. Component 0 of the reward is the objective, components 1..m belong
/// to the constraints, and thresholds() holds the m constraint levels.
class TabularCmdp {
 public:
  /// rewards[i][s][k] is reward component i at state s under the k-th
  /// admissible action of s; transitions[s][k] is the corresponding
  /// distribution over next states.
  TabularCmdp(std::vector<std::vector<int>> admissible,
              std::vector<std::vector<std::vector<double>>> transitions,
              std::vector<std::vector<std::vector<double>>> rewards,
              std::vector<double> thresholds, int start_state);

  /// The three-room monitoring chain: states R_0, R_1, R_2, actions move
  /// deterministically to the named state (R_0 may move to R_1 or R_2, R_i
  /// may stay or return to R_0), reward component i indicates being at R_i.
  /// Both constraint thresholds equal c.
  static TabularCmdp monitoring3(double c = 1.0 / 3.0);

  int num_states() const { return static_cast<int>(admissible_.size()); }
  int num_constraints() const { return static_cast<int>(thresholds_.size()); }
  const std::vector<int>& actions(int s) const { return admissible_.at(s); }
  const std::vector<double>& thresholds() const { return thresholds_; }
  int start_state() const { return start_state_; }

  /// max_i max(1 - c_i, c_i): every |r_i - c_i| is bounded by this.
  double reward_bound() const { return reward_bound_; }

  /// Slot of action id a in the admissible list of s; throws
  /// std::invalid_argument naming the state and action if inadmissible.
  int action_slot(int s, int action) const;

  const std::vector<double>& transition_row(int s, int slot) const {
    return transitions_[s][slot];
  }
  double reward(int component, int s, int slot) const {
    return rewards_[component][s][slot];
  }
  /// Reward vector at state s (rewards are state-only by construction).
  RewardVector state_reward(int s) const;

  bool deterministic_dynamics() const { return deterministic_; }

 private:
  std::vector<std::vector<int>> admissible_;
  std::vector<std::vector<std::vector<double>>> transitions_;
  std::vector<std::vector<std::vector<double>>> rewards_;
  std::vector<double> thresholds_;
  int start_state_;
  double reward_bound_;
  bool deterministic_;
};

struct TabularStep {
  int next_state;
  RewardVector reward;  // evaluated at next_state
};

/// Advances one step: samples s' from the transition row of (state, action)
/// and reports the reward vector of the arrival state.
TabularStep step(const TabularCmdp& mdp, int state, int action, Rng& rng);

/// Pure reward lookup at (state, action). For the built-in environments the
/// value does not depend on the action.
RewardVector reward_at(const TabularCmdp& mdp, int state, int action);

}  // namespace crlab
