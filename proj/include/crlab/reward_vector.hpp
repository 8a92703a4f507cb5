#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace crlab {

/// One reward sample per step: component 0 is the objective reward, the
/// remaining m components belong to the constraints.
using RewardVector = std::vector<double>;

/// Checks |r_i - c_i| <= bound for every constraint component. The bound is
/// the environment's reward bound, so a violation means the sample cannot
/// have come from that environment.
inline void check_reward_bound(const RewardVector& r,
                               const std::vector<double>& thresholds,
                               double bound) {
  if (r.size() != thresholds.size() + 1)
    throw std::invalid_argument("reward vector length does not match constraint count");
  for (std::size_t i = 0; i < thresholds.size(); ++i) {
    const double gap = r[i + 1] - thresholds[i];
    if (gap > bound || gap < -bound)
      throw std::invalid_argument("constraint reward outside the environment's reward bound");
  }
}

}  // namespace crlab
