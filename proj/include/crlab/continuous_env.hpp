#pragma once

#include <vector>

#include "crlab/geometry.hpp"
#include "crlab/reward_vector.hpp"
#include "crlab/rng.hpp"

namespace crlab {

/// Axis-aligned monitoring region with its visitation threshold.
struct Region {
  double xmin, xmax, ymin, ymax;
  double threshold;

  bool contains(const Vec2& p) const {
    return p.x >= xmin && p.x <= xmax && p.y >= ymin && p.y <= ymax;
  }
  Vec2 center() const { return {(xmin + xmax) / 2.0, (ymin + ymax) / 2.0}; }
};

/// Square arena [0, side]^2 with indicator rewards on a set of monitoring
/// regions. The objective reward is identically zero; only the constraints
/// carry signal. An action is a displacement, clamped to max_step in 2-norm
/// before the position is clipped back into the arena.
class ContinuousMonitoringEnv {
 public:
  ContinuousMonitoringEnv(double side, double max_step, std::vector<Region> regions);

  /// The default arena: side 10, unit step, four 2x2 regions centered at
  /// (2,2), (2,8), (8,2), (8,8) with thresholds 0.20, 0.15, 0.10, 0.05.
  static ContinuousMonitoringEnv default_four_region();

  double side() const { return side_; }
  double max_step() const { return max_step_; }
  int num_constraints() const { return static_cast<int>(regions_.size()); }
  const std::vector<Region>& regions() const { return regions_; }
  const std::vector<double>& thresholds() const { return thresholds_; }
  double reward_bound() const { return reward_bound_; }

  /// Uniform over the arena.
  Vec2 sample_start(Rng& rng) const;

  /// Indicator rewards at a position; component 0 is always zero.
  RewardVector reward_at(const Vec2& state) const;

  struct Step {
    Vec2 next_state;
    RewardVector reward;  // evaluated at next_state
  };

  /// next = clip(state + clamp_norm(action, max_step), arena). Throws on
  /// non-finite actions.
  Step step(const Vec2& state, const Vec2& action) const;

 private:
  double side_;
  double max_step_;
  std::vector<Region> regions_;
  std::vector<double> thresholds_;
  double reward_bound_;
};

}  // namespace crlab
