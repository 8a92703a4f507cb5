#include "crlab/executor.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "exec_detail.hpp"

namespace crlab {

void ExecConfig::validate(std::size_t num_constraints) const {
  if (!(eta_lambda > 0.0) || !std::isfinite(eta_lambda))
    throw std::invalid_argument("ExecConfig: eta_lambda must be positive");
  if (t0 < 1) throw std::invalid_argument("ExecConfig: t0 must be at least 1");
  if (epochs < 1) throw std::invalid_argument("ExecConfig: epochs must be at least 1");
  if (trace_every < 0) throw std::invalid_argument("ExecConfig: trace_every must be nonnegative");
  if (occupancy_bins < 1)
    throw std::invalid_argument("ExecConfig: occupancy_bins must be at least 1");
  if (!lambda0.empty()) {
    if (lambda0.size() != num_constraints)
      throw std::invalid_argument("ExecConfig: lambda0 size does not match the constraints");
    for (double v : lambda0)
      if (!std::isfinite(v) || v < 0.0)
        throw std::invalid_argument("ExecConfig: lambda0 must be finite and nonnegative");
  }
}

namespace detail {

namespace {

double l1_norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += std::abs(x);
  return s;
}

}  // namespace

ExecAccumulator::ExecAccumulator(const ExecConfig& cfg, std::vector<double> thresholds,
                                 std::vector<std::string> coordinate_columns,
                                 int occupancy_rows, int occupancy_cols)
    : cfg_(cfg),
      thresholds_(std::move(thresholds)),
      coord_count_(coordinate_columns.size()) {
  const std::size_t m = thresholds_.size();
  lambda_ = cfg_.lambda0.empty() ? DualState::zeros(m) : DualState{cfg_.lambda0};
  reward_sum_.assign(m + 1, 0.0);
  epoch_gap_sum_.assign(m, 0.0);
  occupancy_counts_.assign(static_cast<std::size_t>(occupancy_rows) * occupancy_cols, 0);
  report_.occupancy_rows = occupancy_rows;
  report_.occupancy_cols = occupancy_cols;
  report_.dual_trace.reserve(cfg_.epochs);
  report_.max_lambda_l1 = l1_norm(lambda_.lambda);

  auto& cols = report_.trajectory.columns;
  cols.push_back("t");
  for (auto& c : coordinate_columns) cols.push_back(std::move(c));
  for (std::size_t i = 0; i <= m; ++i) cols.push_back("r_" + std::to_string(i));
  cols.push_back("epoch");
  for (std::size_t i = 1; i <= m; ++i) cols.push_back("lambda_" + std::to_string(i));
  for (std::size_t i = 0; i <= m; ++i) cols.push_back("running_avg_" + std::to_string(i));
}

void ExecAccumulator::record_step(const double* coords, const RewardVector& reward,
                                  int cell) {
  const std::size_t m = thresholds_.size();
  if (reward.size() != m + 1)
    throw std::invalid_argument("ExecAccumulator: reward vector has wrong length");
  for (std::size_t i = 0; i <= m; ++i) reward_sum_[i] += reward[i];
  for (std::size_t i = 0; i < m; ++i) epoch_gap_sum_[i] += reward[i + 1] - thresholds_[i];
  occupancy_counts_.at(cell) += 1;

  if (cfg_.trace_every > 0 && t_ % cfg_.trace_every == 0) {
    std::vector<double> row;
    row.reserve(report_.trajectory.columns.size());
    row.push_back(static_cast<double>(t_));
    for (std::size_t i = 0; i < coord_count_; ++i) row.push_back(coords[i]);
    for (std::size_t i = 0; i <= m; ++i) row.push_back(reward[i]);
    row.push_back(static_cast<double>(epoch_index_));
    for (std::size_t i = 0; i < m; ++i) row.push_back(lambda_[i]);
    const double steps = static_cast<double>(t_ + 1);
    for (std::size_t i = 0; i <= m; ++i) row.push_back(reward_sum_[i] / steps);
    report_.trajectory.rows.push_back(std::move(row));
  }

  ++t_;
  ++epoch_steps_;
}

void ExecAccumulator::finish_epoch() {
  if (epoch_steps_ == 0)
    throw std::logic_error("ExecAccumulator: epoch closed without any steps");
  const std::size_t m = thresholds_.size();
  std::vector<double> mean_gap(m);
  for (std::size_t i = 0; i < m; ++i)
    mean_gap[i] = epoch_gap_sum_[i] / static_cast<double>(epoch_steps_);

  slackness_.observe(lambda_, mean_gap);
  auto update = dual_update(lambda_, mean_gap, cfg_.eta_lambda);
  report_.dual_trace.push_back({lambda_, std::move(mean_gap), std::move(update.projection_active)});
  lambda_ = std::move(update.next);
  report_.max_lambda_l1 = std::max(report_.max_lambda_l1, l1_norm(lambda_.lambda));

  std::fill(epoch_gap_sum_.begin(), epoch_gap_sum_.end(), 0.0);
  epoch_steps_ = 0;
  ++epoch_index_;
}

ExecReport ExecAccumulator::finish() {
  const std::size_t m = thresholds_.size();
  report_.final_lambda = lambda_.lambda;
  report_.total_steps = t_;
  const double steps = static_cast<double>(t_);
  report_.running_average.resize(m + 1);
  for (std::size_t i = 0; i <= m; ++i) report_.running_average[i] = reward_sum_[i] / steps;
  report_.feasibility_margins.resize(m);
  for (std::size_t i = 0; i < m; ++i)
    report_.feasibility_margins[i] = report_.running_average[i + 1] - thresholds_[i];
  report_.slackness_average = slackness_.average();
  report_.occupancy.resize(occupancy_counts_.size());
  for (std::size_t i = 0; i < occupancy_counts_.size(); ++i)
    report_.occupancy[i] = static_cast<double>(occupancy_counts_[i]) / steps;
  return std::move(report_);
}

}  // namespace detail

LambdaPolicyFn exact_maximizer_provider(const TabularCmdp& mdp,
                                        LagrangianSolveOptions options) {
  return [&mdp, options](const std::vector<double>& lambda) {
    return solve_lagrangian_tabular(mdp, DualState{lambda}, options).policy;
  };
}

LambdaPolicyFn frozen_policy_provider(TabularPolicy policy) {
  return [policy = std::move(policy)](const std::vector<double>&) { return policy; };
}

ExecReport execute_acrl(const TabularCmdp& mdp, const LambdaPolicyFn& policy_for,
                        const ExecConfig& cfg) {
  const std::size_t m = mdp.thresholds().size();
  cfg.validate(m);
  if (!policy_for) throw std::invalid_argument("execute_acrl: missing policy provider");
  if (cfg.probe_state >= mdp.num_states())
    throw std::invalid_argument("execute_acrl: probe_state is out of range");

  detail::ExecAccumulator acc(cfg, mdp.thresholds(), {"state", "action"}, 1,
                              mdp.num_states());
  Rng rng = Rng(cfg.seed).substream("execute");
  int state = mdp.start_state();

  for (int k = 0; k < cfg.epochs; ++k) {
    const TabularPolicy policy = policy_for(acc.lambda());
    if (policy.num_states() != mdp.num_states())
      throw std::invalid_argument("execute_acrl: policy does not match the environment");
    if (cfg.record_policies) acc.report().epoch_policies.push_back(policy);
    if (cfg.probe_state >= 0) acc.report().probe_trace.push_back(policy.row(cfg.probe_state));

    std::vector<double> visits;
    if (cfg.record_policies) visits.assign(mdp.num_states(), 0.0);

    for (int t = 0; t < cfg.t0; ++t) {
      if (cfg.record_policies) visits[static_cast<std::size_t>(state)] += 1.0;
      const int action = policy.sample(mdp, state, rng);
      const TabularStep stepped = step(mdp, state, action, rng);
      const double coords[2] = {static_cast<double>(state), static_cast<double>(action)};
      acc.record_step(coords, stepped.reward, stepped.next_state);
      state = stepped.next_state;
    }
    if (cfg.record_policies) acc.report().epoch_state_visits.push_back(std::move(visits));
    acc.finish_epoch();
  }
  return acc.finish();
}

ExecReport execute_acrl(const ContinuousMonitoringEnv& env, const RbfPolicy& policy,
                        const ExecConfig& cfg) {
  const std::size_t m = env.thresholds().size();
  cfg.validate(m);
  if (policy.num_multipliers() != static_cast<int>(m))
    throw std::invalid_argument("execute_acrl: policy multiplier count does not match the environment");

  const int bins = cfg.occupancy_bins;
  detail::ExecAccumulator acc(cfg, env.thresholds(), {"x", "y", "ax", "ay"}, bins, bins);
  Rng rng = Rng(cfg.seed).substream("execute");
  Vec2 state = env.sample_start(rng);

  const auto cell_of = [&](const Vec2& p) {
    const auto axis = [&](double v) {
      int i = static_cast<int>(v / env.side() * bins);
      return std::clamp(i, 0, bins - 1);
    };
    return axis(p.y) * bins + axis(p.x);
  };

  for (int k = 0; k < cfg.epochs; ++k) {
    for (int t = 0; t < cfg.t0; ++t) {
      const Vec2 action = policy.sample_action(state, acc.lambda(), rng);
      const auto stepped = env.step(state, action);
      const double coords[4] = {state.x, state.y, action.x, action.y};
      acc.record_step(coords, stepped.reward, cell_of(stepped.next_state));
      state = stepped.next_state;
    }
    acc.finish_epoch();
  }
  return acc.finish();
}

std::vector<ProbePoint> policy_switch_trace(const ExecReport& report) {
  if (report.probe_trace.empty())
    throw std::invalid_argument("policy_switch_trace: report carries no probe trace");
  if (report.probe_trace.size() != report.dual_trace.size())
    throw std::invalid_argument("policy_switch_trace: probe and dual traces disagree");
  std::vector<ProbePoint> trace;
  trace.reserve(report.probe_trace.size());
  for (std::size_t k = 0; k < report.probe_trace.size(); ++k)
    trace.push_back({static_cast<int>(k), report.dual_trace[k].lambda.lambda,
                     report.probe_trace[k]});
  return trace;
}

OccupancyGrid occupancy_histogram(const ExecReport& report) {
  OccupancyGrid grid{report.occupancy_rows, report.occupancy_cols, report.occupancy};
  if (grid.mass.size() != static_cast<std::size_t>(grid.rows) * grid.cols)
    throw std::invalid_argument("occupancy_histogram: grid shape mismatch");
  double total = 0.0;
  for (double v : grid.mass) total += v;
  if (std::abs(total - 1.0) > 1e-9)
    throw std::runtime_error("occupancy_histogram: mass is not normalized");
  return grid;
}

std::vector<T0SweepRow> t0_bias_sweep(const TabularCmdp& mdp,
                                      const LambdaPolicyFn& policy_for,
                                      const ExecConfig& base,
                                      const std::vector<int>& t0_values) {
  base.validate(mdp.thresholds().size());
  std::set<int> distinct(t0_values.begin(), t0_values.end());
  if (distinct.size() < 2)
    throw std::invalid_argument("t0_bias_sweep: need at least two distinct t0 values");
  for (int t0 : t0_values)
    if (t0 < 1) throw std::invalid_argument("t0_bias_sweep: t0 values must be positive");

  const long long budget = static_cast<long long>(base.t0) * base.epochs;
  std::vector<T0SweepRow> rows;
  rows.reserve(t0_values.size());
  for (int t0 : t0_values) {
    ExecConfig cfg = base;
    cfg.t0 = t0;
    cfg.epochs = static_cast<int>(std::max<long long>(1, budget / t0));
    ExecReport report = execute_acrl(mdp, policy_for, cfg);
    rows.push_back({t0, cfg.epochs, report.total_steps, report.running_average,
                    report.feasibility_margins});
  }
  return rows;
}

double dual_ball_radius(double p_star, double feasible_value, double slack,
                        double eta_lambda, double reward_bound,
                        std::size_t num_constraints) {
  if (!(slack > 0.0))
    throw std::invalid_argument("dual_ball_radius: slack must be positive");
  if (eta_lambda < 0.0 || reward_bound < 0.0)
    throw std::invalid_argument("dual_ball_radius: negative step or reward bound");
  const double drift = eta_lambda * reward_bound * reward_bound / 2.0;
  return (p_star - feasible_value + drift) / slack +
         eta_lambda * reward_bound * static_cast<double>(num_constraints);
}

}  // namespace crlab
