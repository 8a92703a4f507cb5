#include "crlab/tabular_policy.hpp"

#include <cmath>
#include <stdexcept>

#include "crlab/linalg.hpp"

namespace crlab {

namespace {
constexpr double kRowSumTol = 1e-12;
}

TabularPolicy::TabularPolicy(std::vector<std::vector<double>> probs)
    : probs_(std::move(probs)) {
  for (const auto& row : probs_) {
    if (row.empty()) throw std::invalid_argument("TabularPolicy: empty row");
    double sum = 0.0;
    for (double p : row) {
      if (p < 0.0 || !std::isfinite(p))
        throw std::invalid_argument("TabularPolicy: probabilities must be nonnegative");
      sum += p;
    }
    if (std::abs(sum - 1.0) > kRowSumTol)
      throw std::invalid_argument("TabularPolicy: row does not sum to one");
  }
}

TabularPolicy TabularPolicy::deterministic(const TabularCmdp& mdp,
                                           const std::vector<int>& slots) {
  if (static_cast<int>(slots.size()) != mdp.num_states())
    throw std::invalid_argument("TabularPolicy: one slot per state required");
  std::vector<std::vector<double>> probs(mdp.num_states());
  for (int s = 0; s < mdp.num_states(); ++s) {
    const int n = static_cast<int>(mdp.actions(s).size());
    if (slots[s] < 0 || slots[s] >= n)
      throw std::invalid_argument("TabularPolicy: slot out of range");
    probs[s].assign(n, 0.0);
    probs[s][slots[s]] = 1.0;
  }
  return TabularPolicy(std::move(probs));
}

TabularPolicy TabularPolicy::uniform(const TabularCmdp& mdp) {
  std::vector<std::vector<double>> probs(mdp.num_states());
  for (int s = 0; s < mdp.num_states(); ++s)
    probs[s].assign(mdp.actions(s).size(), 1.0 / static_cast<double>(mdp.actions(s).size()));
  return TabularPolicy(std::move(probs));
}

double TabularPolicy::prob_of(const TabularCmdp& mdp, int s, int action) const {
  return probs_.at(s).at(mdp.action_slot(s, action));
}

int TabularPolicy::sample(const TabularCmdp& mdp, int s, Rng& rng) const {
  const auto& row = probs_.at(s);
  const double u = rng.uniform();
  double acc = 0.0;
  for (std::size_t k = 0; k < row.size(); ++k) {
    acc += row[k];
    if (u < acc) return mdp.actions(s)[k];
  }
  return mdp.actions(s).back();
}

int TabularPolicy::argmax_slot(int s) const {
  const auto& row = probs_.at(s);
  int best = 0;
  for (std::size_t k = 1; k < row.size(); ++k)
    if (row[k] > row[best]) best = static_cast<int>(k);
  return best;
}

std::vector<std::vector<double>> policy_chain(const TabularCmdp& mdp,
                                              const TabularPolicy& policy) {
  const int n = mdp.num_states();
  if (policy.num_states() != n)
    throw std::invalid_argument("policy_chain: policy/mdp state count mismatch");
  std::vector<std::vector<double>> chain(n, std::vector<double>(n, 0.0));
  for (int s = 0; s < n; ++s) {
    const auto& row = policy.row(s);
    if (row.size() != mdp.actions(s).size())
      throw std::invalid_argument("policy_chain: policy row does not match actions");
    for (std::size_t k = 0; k < row.size(); ++k) {
      if (row[k] == 0.0) continue;
      const auto& trans = mdp.transition_row(s, static_cast<int>(k));
      for (int t = 0; t < n; ++t) chain[s][t] += row[k] * trans[t];
    }
  }
  return chain;
}

std::vector<double> stationary_distribution(const TabularCmdp& mdp,
                                            const TabularPolicy& policy) {
  const auto chain = policy_chain(mdp, policy);
  const int n = mdp.num_states();
  // Solve mu^T (P - I) = 0 with the last equation replaced by sum(mu) = 1.
  std::vector<std::vector<double>> a(n, std::vector<double>(n, 0.0));
  std::vector<double> b(n, 0.0);
  for (int eq = 0; eq < n - 1; ++eq)
    for (int s = 0; s < n; ++s) a[eq][s] = chain[s][eq] - (s == eq ? 1.0 : 0.0);
  for (int s = 0; s < n; ++s) a[n - 1][s] = 1.0;
  b[n - 1] = 1.0;
  auto mu = solve_linear(std::move(a), std::move(b));
  for (double& v : mu)
    if (v < 0.0 && v > -1e-12) v = 0.0;  // wash out rounding at the boundary
  return mu;
}

std::vector<double> stationary_reward_average(const TabularCmdp& mdp,
                                              const TabularPolicy& policy) {
  const auto mu = stationary_distribution(mdp, policy);
  std::vector<double> avg(mdp.num_constraints() + 1, 0.0);
  for (int s = 0; s < mdp.num_states(); ++s) {
    const auto r = mdp.state_reward(s);
    for (std::size_t i = 0; i < avg.size(); ++i) avg[i] += mu[s] * r[i];
  }
  return avg;
}

std::vector<double> cycle_reward_average(const TabularCmdp& mdp,
                                         const std::vector<int>& slots, int start_state) {
  if (!mdp.deterministic_dynamics())
    throw std::invalid_argument("cycle_reward_average: dynamics must be deterministic");
  const auto next_of = [&](int s) {
    const auto& row = mdp.transition_row(s, slots.at(s));
    for (int t = 0; t < mdp.num_states(); ++t)
      if (row[t] > 0.0) return t;
    return 0;
  };
  // Walk until a state repeats; the tail from its first occurrence is the cycle.
  std::vector<int> visit_order;
  std::vector<int> seen_at(mdp.num_states(), -1);
  int s = start_state;
  while (seen_at[s] < 0) {
    seen_at[s] = static_cast<int>(visit_order.size());
    visit_order.push_back(s);
    s = next_of(s);
  }
  const int cycle_start = seen_at[s];
  std::vector<double> avg(mdp.num_constraints() + 1, 0.0);
  const int cycle_len = static_cast<int>(visit_order.size()) - cycle_start;
  for (int i = cycle_start; i < static_cast<int>(visit_order.size()); ++i) {
    const auto r = mdp.state_reward(visit_order[i]);
    for (std::size_t j = 0; j < avg.size(); ++j) avg[j] += r[j];
  }
  for (double& v : avg) v /= static_cast<double>(cycle_len);
  return avg;
}

std::vector<std::vector<int>> enumerate_deterministic_policies(const TabularCmdp& mdp) {
  std::vector<std::vector<int>> out;
  std::vector<int> slots(mdp.num_states(), 0);
  while (true) {
    out.push_back(slots);
    int s = 0;
    while (s < mdp.num_states()) {
      if (++slots[s] < static_cast<int>(mdp.actions(s).size())) break;
      slots[s] = 0;
      ++s;
    }
    if (s == mdp.num_states()) break;
  }
  return out;
}

}  // namespace crlab
