#pragma once

#include <string>
#include <vector>

#include "crlab/dual_dynamics.hpp"
#include "crlab/executor.hpp"

namespace crlab::detail {

/// Bookkeeping shared by every epoch-structured execution loop (the
/// executor proper and the primal-dual baseline): dual state and trace,
/// reward time-averages, arrival occupancy, slackness, trajectory rows.
/// The loop owns the environment stepping; this class owns the numbers.
class ExecAccumulator {
 public:
  /// coordinate_columns are the per-step position/action column names
  /// ("state", "action" for tabular; "x", "y", "ax", "ay" for continuous).
  ExecAccumulator(const ExecConfig& cfg, std::vector<double> thresholds,
                  std::vector<std::string> coordinate_columns, int occupancy_rows,
                  int occupancy_cols);

  const std::vector<double>& lambda() const { return lambda_.lambda; }
  const DualState& dual_state() const { return lambda_; }
  int epoch() const { return epoch_index_; }

  /// One environment step: coordinate values (matching the column names),
  /// the reward vector at the arrival state, and the arrival's occupancy
  /// cell (row-major).
  void record_step(const double* coords, const RewardVector& reward, int cell);

  /// Closes the current epoch: mean gaps, dual update, slackness, record.
  void finish_epoch();

  /// Direct access for the tabular-only extras (probe rows, policies).
  ExecReport& report() { return report_; }

  /// Normalizes occupancy and fills the derived summary fields.
  ExecReport finish();

 private:
  ExecConfig cfg_;
  std::vector<double> thresholds_;
  std::size_t coord_count_;
  DualState lambda_;
  ExecReport report_;
  SlacknessMonitor slackness_;
  std::vector<double> reward_sum_;
  std::vector<double> epoch_gap_sum_;
  int epoch_steps_ = 0;
  int epoch_index_ = 0;
  long long t_ = 0;
  std::vector<long long> occupancy_counts_;
};

}  // namespace crlab::detail
