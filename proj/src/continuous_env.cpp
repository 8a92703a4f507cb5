#include "crlab/continuous_env.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace crlab {

ContinuousMonitoringEnv::ContinuousMonitoringEnv(double side, double max_step,
                                                 std::vector<Region> regions)
    : side_(side), max_step_(max_step), regions_(std::move(regions)) {
  if (!(side_ > 0.0)) throw std::invalid_argument("ContinuousMonitoringEnv: side must be positive");
  if (!(max_step_ > 0.0))
    throw std::invalid_argument("ContinuousMonitoringEnv: max_step must be positive");
  if (regions_.empty())
    throw std::invalid_argument("ContinuousMonitoringEnv: at least one region required");

  double total = 0.0;
  for (const auto& r : regions_) {
    if (!(r.xmin < r.xmax) || !(r.ymin < r.ymax))
      throw std::invalid_argument("ContinuousMonitoringEnv: degenerate region rectangle");
    if (r.xmin < 0.0 || r.ymin < 0.0 || r.xmax > side_ || r.ymax > side_)
      throw std::invalid_argument("ContinuousMonitoringEnv: region outside the arena");
    if (!(r.threshold >= 0.0 && r.threshold < 1.0))
      throw std::invalid_argument("ContinuousMonitoringEnv: threshold must lie in [0, 1)");
    total += r.threshold;
    thresholds_.push_back(r.threshold);
  }
  // No policy can spend a full unit of time across disjoint regions.
  if (total >= 1.0)
    throw std::invalid_argument("ContinuousMonitoringEnv: thresholds sum to " +
                                std::to_string(total) + ", must be below 1");

  reward_bound_ = 0.0;
  for (double c : thresholds_)
    reward_bound_ = std::max(reward_bound_, std::max(1.0 - c, c));
}

ContinuousMonitoringEnv ContinuousMonitoringEnv::default_four_region() {
  const std::vector<Region> regions = {
      {1.0, 3.0, 1.0, 3.0, 0.20},
      {1.0, 3.0, 7.0, 9.0, 0.15},
      {7.0, 9.0, 1.0, 3.0, 0.10},
      {7.0, 9.0, 7.0, 9.0, 0.05},
  };
  return ContinuousMonitoringEnv(10.0, 1.0, regions);
}

Vec2 ContinuousMonitoringEnv::sample_start(Rng& rng) const {
  return {rng.uniform(0.0, side_), rng.uniform(0.0, side_)};
}

RewardVector ContinuousMonitoringEnv::reward_at(const Vec2& state) const {
  RewardVector r(regions_.size() + 1, 0.0);
  for (std::size_t i = 0; i < regions_.size(); ++i)
    if (regions_[i].contains(state)) r[i + 1] = 1.0;
  return r;
}

ContinuousMonitoringEnv::Step ContinuousMonitoringEnv::step(const Vec2& state,
                                                            const Vec2& action) const {
  if (!action.finite())
    throw std::invalid_argument("ContinuousMonitoringEnv: non-finite action");
  const Vec2 move = clamp_norm(action, max_step_);
  const Vec2 next = {clamp(state.x + move.x, 0.0, side_),
                     clamp(state.y + move.y, 0.0, side_)};
  return {next, reward_at(next)};
}

}  // namespace crlab
