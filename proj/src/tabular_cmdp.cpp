#include "crlab/tabular_cmdp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace crlab {

namespace {
constexpr double kRowSumTol = 1e-12;
}

TabularCmdp::TabularCmdp(std::vector<std::vector<int>> admissible,
                         std::vector<std::vector<std::vector<double>>> transitions,
                         std::vector<std::vector<std::vector<double>>> rewards,
                         std::vector<double> thresholds, int start_state)
    : admissible_(std::move(admissible)),
      transitions_(std::move(transitions)),
      rewards_(std::move(rewards)),
      thresholds_(std::move(thresholds)),
      start_state_(start_state) {
  const int n = num_states();
  if (n == 0) throw std::invalid_argument("TabularCmdp: no states");
  if (start_state_ < 0 || start_state_ >= n)
    throw std::invalid_argument("TabularCmdp: start state out of range");
  if (static_cast<int>(transitions_.size()) != n)
    throw std::invalid_argument("TabularCmdp: transition table size mismatch");
  if (rewards_.size() != thresholds_.size() + 1)
    throw std::invalid_argument("TabularCmdp: need one reward table per component");

  deterministic_ = true;
  for (int s = 0; s < n; ++s) {
    if (admissible_[s].empty())
      throw std::invalid_argument("TabularCmdp: state " + std::to_string(s) +
                                  " has no admissible actions");
    if (transitions_[s].size() != admissible_[s].size())
      throw std::invalid_argument("TabularCmdp: transition rows do not match actions");
    for (const auto& row : transitions_[s]) {
      if (static_cast<int>(row.size()) != n)
        throw std::invalid_argument("TabularCmdp: transition row length mismatch");
      double sum = 0.0;
      int support = 0;
      for (double p : row) {
        if (p < 0.0 || !std::isfinite(p))
          throw std::invalid_argument("TabularCmdp: transition probabilities must be nonnegative");
        sum += p;
        if (p > 0.0) ++support;
      }
      if (std::abs(sum - 1.0) > kRowSumTol)
        throw std::invalid_argument("TabularCmdp: transition row does not sum to one");
      if (support != 1) deterministic_ = false;
    }
  }

  for (const auto& table : rewards_) {
    if (static_cast<int>(table.size()) != n)
      throw std::invalid_argument("TabularCmdp: reward table size mismatch");
    for (int s = 0; s < n; ++s) {
      if (table[s].size() != admissible_[s].size())
        throw std::invalid_argument("TabularCmdp: reward row does not match actions");
      // Rewards must be state functions; step() relies on it.
      for (double v : table[s])
        if (v != table[s][0])
          throw std::invalid_argument("TabularCmdp: reward tables must depend on state only");
    }
  }

  for (double c : thresholds_)
    if (!(c >= 0.0 && c < 1.0))
      throw std::invalid_argument("TabularCmdp: thresholds must lie in [0, 1)");

  reward_bound_ = 0.0;
  for (double c : thresholds_)
    reward_bound_ = std::max(reward_bound_, std::max(1.0 - c, c));
}

TabularCmdp TabularCmdp::monitoring3(double c) {
  const std::vector<std::vector<int>> admissible = {{1, 2}, {0, 1}, {0, 2}};
  std::vector<std::vector<std::vector<double>>> transitions(3);
  for (int s = 0; s < 3; ++s)
    for (int a : admissible[s]) {
      std::vector<double> row(3, 0.0);
      row[a] = 1.0;  // moves where the action points
      transitions[s].push_back(std::move(row));
    }
  std::vector<std::vector<std::vector<double>>> rewards(3);
  for (int i = 0; i < 3; ++i) {
    rewards[i].resize(3);
    for (int s = 0; s < 3; ++s)
      rewards[i][s].assign(admissible[s].size(), s == i ? 1.0 : 0.0);
  }
  return TabularCmdp(admissible, std::move(transitions), std::move(rewards), {c, c}, 0);
}

int TabularCmdp::action_slot(int s, int action) const {
  if (s < 0 || s >= num_states())
    throw std::invalid_argument("TabularCmdp: state " + std::to_string(s) + " out of range");
  const auto& acts = admissible_[s];
  const auto it = std::find(acts.begin(), acts.end(), action);
  if (it == acts.end())
    throw std::invalid_argument("TabularCmdp: action " + std::to_string(action) +
                                " is not admissible at state " + std::to_string(s));
  return static_cast<int>(it - acts.begin());
}

RewardVector TabularCmdp::state_reward(int s) const {
  RewardVector r(rewards_.size());
  for (std::size_t i = 0; i < rewards_.size(); ++i) r[i] = rewards_[i][s][0];
  return r;
}

TabularStep step(const TabularCmdp& mdp, int state, int action, Rng& rng) {
  const int slot = mdp.action_slot(state, action);
  const auto& row = mdp.transition_row(state, slot);
  int next = -1;
  if (mdp.deterministic_dynamics()) {
    for (int s = 0; s < mdp.num_states(); ++s)
      if (row[s] > 0.0) {
        next = s;
        break;
      }
  } else {
    double u = rng.uniform();
    double acc = 0.0;
    for (int s = 0; s < mdp.num_states(); ++s) {
      acc += row[s];
      if (u < acc) {
        next = s;
        break;
      }
    }
    if (next < 0) next = mdp.num_states() - 1;  // guard against rounding
  }
  return {next, mdp.state_reward(next)};
}

RewardVector reward_at(const TabularCmdp& mdp, int state, int action) {
  mdp.action_slot(state, action);  // admissibility check
  return mdp.state_reward(state);
}

}  // namespace crlab
