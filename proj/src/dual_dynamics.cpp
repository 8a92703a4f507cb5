#include "crlab/dual_dynamics.hpp"

#include <cmath>
#include <stdexcept>

namespace crlab {

double lagrangian_reward(const RewardVector& reward, const DualState& lambda,
                         const std::vector<double>& thresholds) {
  if (lambda.size() != thresholds.size())
    throw std::invalid_argument("lagrangian_reward: multiplier/threshold size mismatch");
  if (reward.size() != thresholds.size() + 1)
    throw std::invalid_argument("lagrangian_reward: reward vector has wrong length");
  double value = reward[0];
  for (std::size_t i = 0; i < lambda.size(); ++i)
    value += lambda[i] * (reward[i + 1] - thresholds[i]);
  return value;
}

DualUpdateResult dual_update(const DualState& lambda, const std::vector<double>& mean_gap,
                             double eta) {
  if (lambda.size() != mean_gap.size())
    throw std::invalid_argument("dual_update: multiplier/gap size mismatch");
  if (eta < 0.0) throw std::invalid_argument("dual_update: eta must be nonnegative");
  DualUpdateResult out;
  out.next.lambda.resize(lambda.size());
  out.projection_active.resize(lambda.size());
  for (std::size_t i = 0; i < lambda.size(); ++i) {
    const double raw = lambda[i] - eta * mean_gap[i];
    out.projection_active[i] = raw < 0.0;
    out.next.lambda[i] = raw < 0.0 ? 0.0 : raw;
  }
  return out;
}

std::vector<double> deficit_identity_check(const std::vector<EpochRecord>& history,
                                           double eta) {
  if (history.empty()) return {};
  const std::size_t m = history.front().lambda.size();
  std::vector<double> worst(m, 0.0);
  std::vector<double> deficit(m, 0.0);  // sum over past epochs of (c_i - r_i) epoch means
  std::vector<bool> tainted(m, false);
  if (history.front().lambda.lambda != std::vector<double>(m, 0.0))
    throw std::invalid_argument("deficit_identity_check: history must start at lambda = 0");
  for (const auto& epoch : history) {
    if (epoch.lambda.size() != m || epoch.mean_gap.size() != m ||
        epoch.projection_active.size() != m)
      throw std::invalid_argument("deficit_identity_check: ragged history");
    for (std::size_t i = 0; i < m; ++i) {
      if (!tainted[i]) {
        const double predicted = eta * deficit[i];
        const double err = std::abs(epoch.lambda[i] - predicted);
        if (err > worst[i]) worst[i] = err;
      }
      deficit[i] -= epoch.mean_gap[i];  // mean_gap is r - c, the deficit is c - r
      if (epoch.projection_active[i]) tainted[i] = true;
    }
  }
  return worst;
}

void SlacknessMonitor::observe(const DualState& lambda, const std::vector<double>& mean_gap) {
  if (lambda.size() != mean_gap.size())
    throw std::invalid_argument("SlacknessMonitor: multiplier/gap size mismatch");
  double dot = 0.0;
  for (std::size_t i = 0; i < lambda.size(); ++i) dot += lambda[i] * mean_gap[i];
  sum_ += dot;
  ++count_;
}

double slackness_average(const std::vector<EpochRecord>& history) {
  SlacknessMonitor monitor;
  for (const auto& epoch : history) monitor.observe(epoch.lambda, epoch.mean_gap);
  return monitor.average();
}

}  // namespace crlab
