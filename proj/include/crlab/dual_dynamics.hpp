#pragma once

#include <cstddef>
#include <vector>

#include "crlab/reward_vector.hpp"

namespace crlab {

/// Vector of constraint multipliers; components never go negative.
struct DualState {
  std::vector<double> lambda;

  static DualState zeros(std::size_t m) { return DualState{std::vector<double>(m, 0.0)}; }
  std::size_t size() const { return lambda.size(); }
  double operator[](std::size_t i) const { return lambda[i]; }
};

/// r_0 + sum_i lambda_i (r_i - c_i). Throws if the sizes disagree.
double lagrangian_reward(const RewardVector& reward, const DualState& lambda,
                         const std::vector<double>& thresholds);

struct DualUpdateResult {
  DualState next;
  /// Per component: the unprojected value went negative and was clamped.
  std::vector<bool> projection_active;
};

/// lambda_i' = max(0, lambda_i - eta * mean_gap_i), where mean_gap_i is the
/// epoch mean of r_i - c_i. The map is non-expansive in the sup norm and
/// keeps every component nonnegative.
DualUpdateResult dual_update(const DualState& lambda, const std::vector<double>& mean_gap,
                             double eta);

/// What the executor records per dual update: the multipliers that were in
/// force, the epoch's mean constraint gaps, and which components hit the
/// projection.
struct EpochRecord {
  DualState lambda;                    // multipliers used during the epoch
  std::vector<double> mean_gap;        // (1/T0) sum_t (r_i - c_i)
  std::vector<bool> projection_active; // of the update that closed the epoch
};

/// As long as the projection never fires, the multiplier equals the scaled
/// running deficit: lambda_{i,k} = eta * mean over the first k epochs of
/// (c_i - r_i). Replays that identity against a recorded history, skipping
/// for each component every prefix that contains a projection on it, and
/// returns the per-component maximum absolute discrepancy (0 for components
/// with no checkable prefix).
std::vector<double> deficit_identity_check(const std::vector<EpochRecord>& history,
                                           double eta);

/// Running sum of lambda_k . mean_gap_k; average() divides by the number of
/// epochs observed.
class SlacknessMonitor {
 public:
  void observe(const DualState& lambda, const std::vector<double>& mean_gap);
  double average() const { return count_ == 0 ? 0.0 : sum_ / static_cast<double>(count_); }
  std::size_t count() const { return count_; }

 private:
  double sum_ = 0.0;
  std::size_t count_ = 0;
};

/// (1/K) sum_k lambda_k . gap_k over a recorded history.
double slackness_average(const std::vector<EpochRecord>& history);

}  // namespace crlab
