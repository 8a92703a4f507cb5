#include "crlab/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "crlab/dual_dynamics.hpp"
#include "exec_detail.hpp"

namespace crlab {

namespace {

ExecConfig accumulator_config(const PrimalDualConfig& cfg) {
  ExecConfig inner;
  inner.eta_lambda = cfg.eta_dual;
  inner.t0 = cfg.t0;
  inner.epochs = cfg.epochs;
  inner.seed = cfg.seed;
  inner.lambda0 = cfg.lambda0;
  inner.trace_every = cfg.trace_every;
  inner.probe_state = cfg.probe_state;
  inner.record_policies = cfg.record_policies;
  inner.occupancy_bins = cfg.occupancy_bins;
  return inner;
}

void check_divergence(double norm_sq, int epoch, const char* what) {
  if (norm_sq <= 1e12) return;  // norm 1e6
  std::ostringstream msg;
  msg << what << ": parameter norm " << std::sqrt(norm_sq) << " after epoch " << epoch
      << " exceeds 1e6; the primal step is too large";
  throw std::runtime_error(msg.str());
}

}  // namespace

void PrimalDualConfig::validate(std::size_t num_constraints) const {
  if (eta_primal < 0.0 || !std::isfinite(eta_primal))
    throw std::invalid_argument("PrimalDualConfig: eta_primal must be nonnegative");
  if (eta_dual < 0.0 || !std::isfinite(eta_dual))
    throw std::invalid_argument("PrimalDualConfig: eta_dual must be nonnegative");
  if (t0 < 1) throw std::invalid_argument("PrimalDualConfig: t0 must be at least 1");
  if (epochs < 1) throw std::invalid_argument("PrimalDualConfig: epochs must be at least 1");
  if (trace_every < 0)
    throw std::invalid_argument("PrimalDualConfig: trace_every must be nonnegative");
  if (occupancy_bins < 1)
    throw std::invalid_argument("PrimalDualConfig: occupancy_bins must be at least 1");
  if (!lambda0.empty()) {
    if (lambda0.size() != num_constraints)
      throw std::invalid_argument("PrimalDualConfig: lambda0 size does not match the constraints");
    for (double v : lambda0)
      if (!std::isfinite(v) || v < 0.0)
        throw std::invalid_argument("PrimalDualConfig: lambda0 must be finite and nonnegative");
  }
}

TabularPolicy softmax_policy(const TabularCmdp& mdp,
                             const std::vector<std::vector<double>>& logits) {
  if (logits.size() != static_cast<std::size_t>(mdp.num_states()))
    throw std::invalid_argument("softmax_policy: one logit row per state required");
  std::vector<std::vector<double>> probs(logits.size());
  for (int s = 0; s < mdp.num_states(); ++s) {
    const auto& row = logits[static_cast<std::size_t>(s)];
    if (row.size() != mdp.actions(s).size())
      throw std::invalid_argument("softmax_policy: logit row does not match the action set");
    const double top = *std::max_element(row.begin(), row.end());
    auto& out = probs[static_cast<std::size_t>(s)];
    out.resize(row.size());
    double z = 0.0;
    for (std::size_t k = 0; k < row.size(); ++k) {
      out[k] = std::exp(row[k] - top);
      z += out[k];
    }
    for (double& p : out) p /= z;
  }
  return TabularPolicy(std::move(probs));
}

PrimalDualResult run_primal_dual(const TabularCmdp& mdp, const PrimalDualConfig& cfg) {
  const std::size_t m = mdp.thresholds().size();
  cfg.validate(m);
  if (cfg.probe_state >= mdp.num_states())
    throw std::invalid_argument("run_primal_dual: probe_state is out of range");

  detail::ExecAccumulator acc(accumulator_config(cfg), mdp.thresholds(),
                              {"state", "action"}, 1, mdp.num_states());
  Rng rng = Rng(cfg.seed).substream("execute");
  int state = mdp.start_state();

  std::vector<std::vector<double>> logits(static_cast<std::size_t>(mdp.num_states()));
  std::vector<std::vector<double>> score(logits.size());
  for (int s = 0; s < mdp.num_states(); ++s) {
    logits[static_cast<std::size_t>(s)].assign(mdp.actions(s).size(), 0.0);
    score[static_cast<std::size_t>(s)].assign(mdp.actions(s).size(), 0.0);
  }

  for (int k = 0; k < cfg.epochs; ++k) {
    const TabularPolicy policy = softmax_policy(mdp, logits);
    if (cfg.record_policies) acc.report().epoch_policies.push_back(policy);
    if (cfg.probe_state >= 0)
      acc.report().probe_trace.push_back(policy.row(cfg.probe_state));

    for (auto& row : score) std::fill(row.begin(), row.end(), 0.0);
    double weighted_return = 0.0;

    for (int t = 0; t < cfg.t0; ++t) {
      const int action = policy.sample(mdp, state, rng);
      const int slot = mdp.action_slot(state, action);

      // Score of the softmax at the decision state: e_slot - pi(.|s).
      const auto& law = policy.row(state);
      auto& srow = score[static_cast<std::size_t>(state)];
      for (std::size_t j = 0; j < srow.size(); ++j) srow[j] -= law[j];
      srow[static_cast<std::size_t>(slot)] += 1.0;

      const TabularStep stepped = step(mdp, state, action, rng);
      weighted_return +=
          lagrangian_reward(stepped.reward, acc.dual_state(), mdp.thresholds());
      const double coords[2] = {static_cast<double>(state), static_cast<double>(action)};
      acc.record_step(coords, stepped.reward, stepped.next_state);
      state = stepped.next_state;
    }

    if (cfg.eta_primal > 0.0) {
      // The Lagrangian is an average-reward objective, so the epoch's
      // estimate of it is the mean weighted reward, not the sum.
      const double epoch_value = weighted_return / static_cast<double>(cfg.t0);
      double norm_sq = 0.0;
      for (std::size_t s = 0; s < logits.size(); ++s)
        for (std::size_t j = 0; j < logits[s].size(); ++j) {
          logits[s][j] += cfg.eta_primal * epoch_value * score[s][j];
          norm_sq += logits[s][j] * logits[s][j];
        }
      check_divergence(norm_sq, k, "run_primal_dual");
    }
    acc.finish_epoch();
  }

  PrimalDualResult result;
  result.final_policy = softmax_policy(mdp, logits);
  result.final_logits = std::move(logits);
  result.report = acc.finish();
  return result;
}

ExecReport run_primal_dual(const ContinuousMonitoringEnv& env, RbfPolicy& policy,
                           const PrimalDualConfig& cfg) {
  const std::size_t m = env.thresholds().size();
  cfg.validate(m);
  if (policy.num_multipliers() != static_cast<int>(m))
    throw std::invalid_argument(
        "run_primal_dual: policy multiplier count does not match the environment");

  const int bins = cfg.occupancy_bins;
  detail::ExecAccumulator acc(accumulator_config(cfg), env.thresholds(),
                              {"x", "y", "ax", "ay"}, bins, bins);
  Rng rng = Rng(cfg.seed).substream("execute");
  Vec2 state = env.sample_start(rng);

  const auto cell_of = [&](const Vec2& p) {
    const auto axis = [&](double v) {
      int i = static_cast<int>(v / env.side() * bins);
      return std::clamp(i, 0, bins - 1);
    };
    return axis(p.y) * bins + axis(p.x);
  };

  std::vector<double> theta = policy.theta();
  std::vector<double> score(theta.size());
  std::vector<double> grad;

  for (int k = 0; k < cfg.epochs; ++k) {
    std::fill(score.begin(), score.end(), 0.0);
    double weighted_return = 0.0;

    for (int t = 0; t < cfg.t0; ++t) {
      const Vec2 action = policy.sample_action(state, acc.lambda(), rng);
      policy.log_prob_grad(state, acc.lambda(), action, grad);
      for (std::size_t j = 0; j < score.size(); ++j) score[j] += grad[j];

      const auto stepped = env.step(state, action);
      weighted_return +=
          lagrangian_reward(stepped.reward, acc.dual_state(), env.thresholds());
      const double coords[4] = {state.x, state.y, action.x, action.y};
      acc.record_step(coords, stepped.reward, cell_of(stepped.next_state));
      state = stepped.next_state;
    }

    if (cfg.eta_primal > 0.0) {
      const double epoch_value = weighted_return / static_cast<double>(cfg.t0);
      double norm_sq = 0.0;
      for (std::size_t j = 0; j < theta.size(); ++j) {
        theta[j] += cfg.eta_primal * epoch_value * score[j];
        norm_sq += theta[j] * theta[j];
      }
      check_divergence(norm_sq, k, "run_primal_dual");
      policy.set_theta(theta);
    }
    acc.finish_epoch();
  }
  return acc.finish();
}

void AveragedTabularPolicy::observe(const TabularPolicy& policy) {
  observe(policy, std::vector<double>(static_cast<std::size_t>(policy.num_states()), 1.0));
}

void AveragedTabularPolicy::observe(const TabularPolicy& policy,
                                    const std::vector<double>& state_weights) {
  if (state_weights.size() != static_cast<std::size_t>(policy.num_states()))
    throw std::invalid_argument("AveragedTabularPolicy: one weight per state required");
  for (double w : state_weights)
    if (!std::isfinite(w) || w < 0.0)
      throw std::invalid_argument("AveragedTabularPolicy: weights must be finite and nonnegative");

  if (count_ == 0) {
    weighted_sums_.resize(static_cast<std::size_t>(policy.num_states()));
    plain_sums_.resize(weighted_sums_.size());
    for (int s = 0; s < policy.num_states(); ++s) {
      weighted_sums_[static_cast<std::size_t>(s)].assign(policy.row(s).size(), 0.0);
      plain_sums_[static_cast<std::size_t>(s)].assign(policy.row(s).size(), 0.0);
    }
    weight_totals_.assign(weighted_sums_.size(), 0.0);
  }
  if (policy.num_states() != static_cast<int>(weighted_sums_.size()))
    throw std::invalid_argument("AveragedTabularPolicy: state count changed");

  for (int s = 0; s < policy.num_states(); ++s) {
    const auto& row = policy.row(s);
    const auto si = static_cast<std::size_t>(s);
    if (row.size() != weighted_sums_[si].size())
      throw std::invalid_argument("AveragedTabularPolicy: action set changed");
    for (std::size_t j = 0; j < row.size(); ++j) {
      weighted_sums_[si][j] += state_weights[si] * row[j];
      plain_sums_[si][j] += row[j];
    }
    weight_totals_[si] += state_weights[si];
  }
  ++count_;
}

TabularPolicy AveragedTabularPolicy::mean() const {
  if (count_ == 0)
    throw std::logic_error("AveragedTabularPolicy: nothing observed yet");
  std::vector<std::vector<double>> probs(weighted_sums_.size());
  for (std::size_t s = 0; s < weighted_sums_.size(); ++s) {
    const auto& sums = weight_totals_[s] > 0.0 ? weighted_sums_[s] : plain_sums_[s];
    probs[s].resize(sums.size());
    double total = 0.0;
    for (double v : sums) total += v;
    // Every observed row summed to 1, so total equals the accumulated
    // weight up to rounding; dividing by the actual total keeps the mean a
    // distribution.
    for (std::size_t j = 0; j < sums.size(); ++j) probs[s][j] = sums[j] / total;
  }
  return TabularPolicy(std::move(probs));
}

AveragedTabularPolicy primal_average_update(AveragedTabularPolicy average,
                                            const TabularPolicy& policy) {
  average.observe(policy);
  return average;
}

AveragedTabularPolicy average_maximizer_sequence(const ExecReport& report) {
  if (report.epoch_policies.empty())
    throw std::invalid_argument(
        "average_maximizer_sequence: the run did not record its policies");
  if (report.epoch_state_visits.size() != report.epoch_policies.size())
    throw std::invalid_argument(
        "average_maximizer_sequence: policies and visit counts disagree");
  AveragedTabularPolicy average;
  for (std::size_t k = 0; k < report.epoch_policies.size(); ++k)
    average.observe(report.epoch_policies[k], report.epoch_state_visits[k]);
  return average;
}

SwitchTiming switch_timing(const ExecReport& report, int stay_slot) {
  const auto probe = policy_switch_trace(report);
  SwitchTiming timing;
  for (const ProbePoint& point : probe) {
    if (point.lambda.empty()) throw std::invalid_argument("switch_timing: empty multipliers");
    if (stay_slot < 0 || static_cast<std::size_t>(stay_slot) >= point.action_law.size())
      throw std::invalid_argument("switch_timing: stay_slot out of range");
    if (!timing.lambda_cross && point.lambda[0] > 1.0) timing.lambda_cross = point.epoch;
    if (timing.lambda_cross && !timing.policy_switch &&
        point.action_law[static_cast<std::size_t>(stay_slot)] > 0.5)
      timing.policy_switch = point.epoch;
  }
  return timing;
}

std::pair<SwitchTiming, SwitchTiming> switch_delay_compare(const ExecReport& acrl,
                                                           const ExecReport& primal_dual,
                                                           int stay_slot) {
  return {switch_timing(acrl, stay_slot), switch_timing(primal_dual, stay_slot)};
}

double peak_multiplier(const ExecReport& report, std::size_t component) {
  double peak = 0.0;
  for (const EpochRecord& rec : report.dual_trace) {
    if (component >= rec.lambda.size())
      throw std::invalid_argument("peak_multiplier: component out of range");
    peak = std::max(peak, rec.lambda[component]);
  }
  if (component < report.final_lambda.size())
    peak = std::max(peak, report.final_lambda[component]);
  return peak;
}

}  // namespace crlab
