#include "crlab/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <memory>
#include <sstream>
#include <stdexcept>

#include "crlab/dual_dynamics.hpp"

namespace crlab {

namespace {

void fill_uniform_lambda(Rng& rng, double lambda_max, std::size_t m,
                         std::vector<double>& lambda) {
  lambda.resize(m);
  for (std::size_t i = 0; i < m; ++i) lambda[i] = rng.uniform(0.0, lambda_max);
}

double norm2(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace

void TrainConfig::validate() const {
  if (iterations < 0) throw std::invalid_argument("TrainConfig: iterations must be >= 0");
  if (horizon < 1) throw std::invalid_argument("TrainConfig: horizon must be >= 1");
  if (!(eta_theta > 0.0) || !std::isfinite(eta_theta))
    throw std::invalid_argument("TrainConfig: eta_theta must be positive and finite");
  if (!(lambda_max >= 0.0) || !std::isfinite(lambda_max))
    throw std::invalid_argument("TrainConfig: lambda_max must be nonnegative and finite");
  if (batch < 1) throw std::invalid_argument("TrainConfig: batch must be >= 1");
  if (curve_every < 0) throw std::invalid_argument("TrainConfig: curve_every must be >= 0");
}

void sample_augmented_start(Rng& rng, const ContinuousMonitoringEnv& env,
                            double lambda_max, Vec2& state,
                            std::vector<double>& lambda) {
  state = env.sample_start(rng);
  fill_uniform_lambda(rng, lambda_max, static_cast<std::size_t>(env.num_constraints()),
                      lambda);
}

void sample_augmented_start(Rng& rng, const TabularCmdp& mdp, double lambda_max,
                            int& state, std::vector<double>& lambda) {
  state = mdp.start_state();
  fill_uniform_lambda(rng, lambda_max, static_cast<std::size_t>(mdp.num_constraints()),
                      lambda);
}

RolloutSample rollout_augmented(const ContinuousMonitoringEnv& env,
                                const RbfPolicy& policy, const Vec2& start,
                                const std::vector<double>& lambda, int horizon,
                                Rng& rng) {
  if (horizon < 1) throw std::invalid_argument("rollout_augmented: horizon must be >= 1");

  RolloutSample out;
  out.score_sum.assign(policy.theta().size(), 0.0);

  const DualState dual{lambda};
  const double inv_var = 1.0 / (policy.sigma() * policy.sigma());
  std::vector<double> phi;

  Vec2 state = start;
  for (int t = 0; t < horizon; ++t) {
    // One feature evaluation serves both the action draw and the score.
    policy.features(state, lambda, phi);
    const Vec2 mean = policy.mean_from_features(phi);
    const Vec2 action{mean.x + policy.sigma() * rng.normal(),
                      mean.y + policy.sigma() * rng.normal()};
    const double rx = (action.x - mean.x) * inv_var;
    const double ry = (action.y - mean.y) * inv_var;
    for (std::size_t k = 0; k < phi.size(); ++k) {
      out.score_sum[2 * k] += phi[k] * rx;
      out.score_sum[2 * k + 1] += phi[k] * ry;
    }

    const auto step = env.step(state, action);
    out.return_value += lagrangian_reward(step.reward, dual, env.thresholds());
    state = step.next_state;
  }
  return out;
}

TrainReport train_acrl(const ContinuousMonitoringEnv& env, RbfPolicy& policy,
                       const TrainConfig& cfg) {
  cfg.validate();
  if (policy.num_multipliers() != env.num_constraints())
    throw std::invalid_argument(
        "train_acrl: policy multiplier axes do not match the environment's constraints");

  const auto t_start = std::chrono::steady_clock::now();
  Rng rng = Rng(cfg.seed).substream("train");

  std::vector<double> theta = policy.theta();
  std::vector<RolloutSample> pending;
  pending.reserve(static_cast<std::size_t>(cfg.batch));

  TrainReport report;
  long long next_curve = cfg.curve_every;

  Vec2 start;
  std::vector<double> lambda;

  const auto apply_update = [&](long long iterations_done) {
    double mean_return = 0.0;
    for (const RolloutSample& s : pending) mean_return += s.return_value;
    mean_return /= static_cast<double>(pending.size());

    const double baseline =
        cfg.baseline == TrainConfig::Baseline::mean_subtraction ? mean_return : 0.0;
    const double scale = cfg.eta_theta / static_cast<double>(pending.size());
    for (const RolloutSample& s : pending) {
      const double w = scale * (s.return_value - baseline);
      if (w == 0.0) continue;
      for (std::size_t j = 0; j < theta.size(); ++j) theta[j] += w * s.score_sum[j];
    }
    pending.clear();

    const double norm = norm2(theta);
    if (!(norm <= 1e6)) {
      std::ostringstream msg;
      msg << "train_acrl: parameter norm " << norm << " after iteration "
          << iterations_done << " exceeds 1e6; the step size is too large";
      throw std::runtime_error(msg.str());
    }
    policy.set_theta(theta);

    if (cfg.curve_every > 0 && iterations_done >= next_curve) {
      report.curve.push_back({iterations_done, mean_return, norm});
      while (next_curve <= iterations_done) next_curve += cfg.curve_every;
    }
  };

  for (long long iter = 0; iter < cfg.iterations; ++iter) {
    sample_augmented_start(rng, env, cfg.lambda_max, start, lambda);
    pending.push_back(rollout_augmented(env, policy, start, lambda, cfg.horizon, rng));
    if (static_cast<int>(pending.size()) == cfg.batch || iter + 1 == cfg.iterations)
      apply_update(iter + 1);
  }

  report.theta = policy.theta();
  report.iterations_run = cfg.iterations;
  report.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return report;
}

LambdaGrid LambdaGrid::uniform(double lambda_max, double resolution, int dims) {
  if (!(resolution > 0.0) || !std::isfinite(resolution))
    throw std::invalid_argument("LambdaGrid: resolution must be positive and finite");
  if (!(lambda_max >= 0.0) || !std::isfinite(lambda_max))
    throw std::invalid_argument("LambdaGrid: lambda_max must be nonnegative and finite");
  if (dims < 1) throw std::invalid_argument("LambdaGrid: dims must be >= 1");

  LambdaGrid grid;
  grid.dims = dims;
  const auto count = static_cast<std::size_t>(lambda_max / resolution + 1e-9) + 1;
  grid.axis.reserve(count);
  for (std::size_t i = 0; i < count; ++i)
    grid.axis.push_back(static_cast<double>(i) * resolution);
  return grid;
}

std::size_t LambdaGrid::size() const {
  if (axis.empty() || dims <= 0) return 0;
  std::size_t n = 1;
  for (int d = 0; d < dims; ++d) n *= axis.size();
  return n;
}

std::vector<double> LambdaGrid::point(std::size_t index) const {
  if (index >= size()) throw std::out_of_range("LambdaGrid::point: index out of range");
  std::vector<double> out(static_cast<std::size_t>(dims));
  for (int d = dims - 1; d >= 0; --d) {
    out[static_cast<std::size_t>(d)] = axis[index % axis.size()];
    index /= axis.size();
  }
  return out;
}

std::size_t LambdaGrid::nearest(const std::vector<double>& lambda) const {
  if (axis.empty()) throw std::logic_error("LambdaGrid::nearest: empty grid");
  if (lambda.size() != static_cast<std::size_t>(dims))
    throw std::invalid_argument("LambdaGrid::nearest: wrong multiplier count");

  std::size_t index = 0;
  for (int d = 0; d < dims; ++d) {
    const double v = lambda[static_cast<std::size_t>(d)];
    if (!std::isfinite(v))
      throw std::invalid_argument("LambdaGrid::nearest: non-finite multiplier");
    const auto hi = std::lower_bound(axis.begin(), axis.end(), v);
    std::size_t pick;
    if (hi == axis.begin()) {
      pick = 0;
    } else if (hi == axis.end()) {
      pick = axis.size() - 1;
    } else {
      const std::size_t above = static_cast<std::size_t>(hi - axis.begin());
      const std::size_t below = above - 1;
      // Strictly closer wins; an exact midpoint keeps the lower value.
      pick = (v - axis[below] <= axis[above] - v) ? below : above;
    }
    index = index * axis.size() + pick;
  }
  return index;
}

TabularPolicyTable solve_tabular_training(const TabularCmdp& mdp, const LambdaGrid& grid,
                                          const LagrangianSolveOptions& opts) {
  if (grid.size() > 0 && grid.dims != mdp.num_constraints())
    throw std::invalid_argument(
        "solve_tabular_training: grid dimension does not match the constraint count");

  TabularPolicyTable table;
  table.grid = grid;
  table.reports.reserve(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i)
    table.reports.push_back(solve_lagrangian_tabular(mdp, DualState{grid.point(i)}, opts));
  return table;
}

LambdaPolicyFn grid_policy_provider(TabularPolicyTable table) {
  auto shared = std::make_shared<TabularPolicyTable>(std::move(table));
  if (shared->reports.size() != shared->grid.size())
    throw std::invalid_argument("grid_policy_provider: table size does not match its grid");
  if (shared->reports.empty())
    throw std::invalid_argument("grid_policy_provider: empty table");
  return [shared](const std::vector<double>& lambda) {
    return shared->reports[shared->grid.nearest(lambda)].policy;
  };
}

}  // namespace crlab
