#include <cmath>
#include <stdexcept>
#include <vector>

#include "crlab/trainer.hpp"
#include "doctest.h"

using namespace crlab;

namespace {

// Small policy so gradient statistics are cheap: 2 centers per axis over
// the default four-region arena gives 2*2*2^4 = 64 features.
RbfPolicy small_policy(const ContinuousMonitoringEnv& env, double lambda_max) {
  return RbfPolicy::grid(env.side(), 2, env.num_constraints(), lambda_max, 2, 0.5);
}

std::vector<double> seeded_theta(std::size_t n, std::uint64_t seed, double span) {
  Rng rng(seed);
  std::vector<double> theta(n);
  for (double& v : theta) v = rng.uniform(-span, span);
  return theta;
}

struct MeanVar {
  double mean = 0.0;
  double se = 0.0;
};

MeanVar summarize(const std::vector<double>& xs) {
  double sum = 0.0;
  for (double x : xs) sum += x;
  const double mean = sum / static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  const double var = ss / static_cast<double>(xs.size() - 1);
  return {mean, std::sqrt(var / static_cast<double>(xs.size()))};
}

}  // namespace

TEST_CASE("train config validation rejects bad fields") {
  TrainConfig cfg;
  cfg.validate();

  TrainConfig bad = cfg;
  bad.iterations = -1;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = cfg;
  bad.horizon = 0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = cfg;
  bad.eta_theta = 0.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = cfg;
  bad.lambda_max = -0.5;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = cfg;
  bad.batch = 0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = cfg;
  bad.curve_every = -1;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("augmented start sampling covers the box uniformly") {
  const ContinuousMonitoringEnv env = ContinuousMonitoringEnv::default_four_region();
  Rng rng(42);
  Vec2 state;
  std::vector<double> lambda;

  const double lambda_max = 5.0;
  const int n = 100000;
  std::vector<double> sums(static_cast<std::size_t>(env.num_constraints()), 0.0);
  double state_lo = 1e300;
  double state_hi = -1e300;
  double lambda_lo = 1e300;
  double lambda_hi = -1e300;
  for (int i = 0; i < n; ++i) {
    sample_augmented_start(rng, env, lambda_max, state, lambda);
    state_lo = std::min({state_lo, state.x, state.y});
    state_hi = std::max({state_hi, state.x, state.y});
    REQUIRE(lambda.size() == sums.size());
    for (std::size_t j = 0; j < lambda.size(); ++j) {
      lambda_lo = std::min(lambda_lo, lambda[j]);
      lambda_hi = std::max(lambda_hi, lambda[j]);
      sums[j] += lambda[j];
    }
  }
  CHECK(state_lo >= 0.0);
  CHECK(state_hi <= env.side());
  CHECK(lambda_lo >= 0.0);
  CHECK(lambda_hi < lambda_max);

  // Law of large numbers on each component against the box midpoint.
  const double se = lambda_max / std::sqrt(12.0) / std::sqrt(static_cast<double>(n));
  for (double s : sums) CHECK(std::abs(s / n - lambda_max / 2.0) <= 3.0 * se);
}

TEST_CASE("degenerate multiplier box always samples zero") {
  const TabularCmdp mdp = TabularCmdp::monitoring3();
  Rng rng(3);
  int state = -1;
  std::vector<double> lambda;
  for (int i = 0; i < 100; ++i) {
    sample_augmented_start(rng, mdp, 0.0, state, lambda);
    CHECK(state == mdp.start_state());
    REQUIRE(lambda.size() == 2);
    CHECK(lambda[0] == 0.0);
    CHECK(lambda[1] == 0.0);
  }
}

TEST_CASE("zero iterations leave the policy untouched") {
  const ContinuousMonitoringEnv env = ContinuousMonitoringEnv::default_four_region();
  RbfPolicy policy = small_policy(env, 5.0);
  policy.set_theta(seeded_theta(policy.theta().size(), 8, 0.2));
  const std::vector<double> before = policy.theta();

  TrainConfig cfg;
  cfg.iterations = 0;
  const TrainReport report = train_acrl(env, policy, cfg);

  CHECK(report.iterations_run == 0);
  CHECK(report.curve.empty());
  CHECK(policy.theta() == before);
}

TEST_CASE("zero objective and zero multipliers freeze the parameters") {
  // With the multiplier box collapsed to the origin the weighted reward is
  // identically the objective, and the objective reward is identically zero
  // in this arena, so every return is exactly zero and no update can move.
  const ContinuousMonitoringEnv env = ContinuousMonitoringEnv::default_four_region();
  RbfPolicy policy = small_policy(env, 5.0);
  policy.set_theta(seeded_theta(policy.theta().size(), 9, 0.3));
  const std::vector<double> before = policy.theta();

  TrainConfig cfg;
  cfg.iterations = 50;
  cfg.batch = 5;
  cfg.lambda_max = 0.0;
  cfg.baseline = TrainConfig::Baseline::none;
  const TrainReport report = train_acrl(env, policy, cfg);

  CHECK(policy.theta() == before);
  CHECK(report.theta == before);
}

TEST_CASE("curve sampling follows the configured cadence") {
  const ContinuousMonitoringEnv env = ContinuousMonitoringEnv::default_four_region();
  RbfPolicy policy = small_policy(env, 5.0);

  TrainConfig cfg;
  cfg.iterations = 100;
  cfg.batch = 10;
  cfg.curve_every = 20;
  cfg.seed = 5;
  const TrainReport report = train_acrl(env, policy, cfg);

  REQUIRE(report.curve.size() == 5);
  for (std::size_t i = 0; i < report.curve.size(); ++i) {
    CHECK(report.curve[i].iteration == 20 * static_cast<long long>(i + 1));
    CHECK(std::isfinite(report.curve[i].mean_augmented_return));
    CHECK(report.curve[i].theta_norm >= 0.0);
  }
  CHECK(report.iterations_run == 100);

  // Disabled cadence records nothing.
  RbfPolicy quiet = small_policy(env, 5.0);
  cfg.curve_every = 0;
  CHECK(train_acrl(env, quiet, cfg).curve.empty());
}

TEST_CASE("training is reproducible per seed") {
  const ContinuousMonitoringEnv env = ContinuousMonitoringEnv::default_four_region();

  TrainConfig cfg;
  cfg.iterations = 30;
  cfg.batch = 5;
  cfg.seed = 21;

  RbfPolicy a = small_policy(env, 5.0);
  RbfPolicy b = small_policy(env, 5.0);
  train_acrl(env, a, cfg);
  train_acrl(env, b, cfg);
  CHECK(a.theta() == b.theta());

  RbfPolicy c = small_policy(env, 5.0);
  cfg.seed = 22;
  train_acrl(env, c, cfg);
  CHECK(a.theta() != c.theta());
}

TEST_CASE("oversized step size trips the divergence guard") {
  const ContinuousMonitoringEnv env = ContinuousMonitoringEnv::default_four_region();
  RbfPolicy policy = small_policy(env, 5.0);

  TrainConfig cfg;
  cfg.iterations = 50;
  cfg.batch = 1;
  cfg.baseline = TrainConfig::Baseline::none;
  cfg.eta_theta = 1e10;
  cfg.seed = 2;
  CHECK_THROWS_AS(train_acrl(env, policy, cfg), std::runtime_error);
}

TEST_CASE("policy gradient estimator agrees with finite differences") {
  // The update direction train_acrl accumulates is G times the summed score.
  // Its expectation must equal the gradient of E[G]. The oracle estimates
  // that gradient by central differences of E[G] under common random
  // numbers, two-step rollouts from a fixed start and multiplier vector.
  const ContinuousMonitoringEnv env = ContinuousMonitoringEnv::default_four_region();
  RbfPolicy policy = small_policy(env, 5.0);
  const std::vector<double> theta0 = seeded_theta(policy.theta().size(), 77, 0.3);
  policy.set_theta(theta0);

  const Vec2 start{3.0, 4.0};
  const std::vector<double> lambda{2.0, 0.5, 0.0, 1.0};
  const int horizon = 2;

  const std::vector<std::size_t> coords{0, 17, 40, 63, 90, 127};

  // REINFORCE estimate, one long stream.
  const int reps_u = 40000;
  std::vector<std::vector<double>> updates(coords.size());
  {
    Rng rng(501);
    for (int r = 0; r < reps_u; ++r) {
      const RolloutSample s = rollout_augmented(env, policy, start, lambda, horizon, rng);
      for (std::size_t c = 0; c < coords.size(); ++c)
        updates[c].push_back(s.return_value * s.score_sum[coords[c]]);
    }
  }

  // Central differences, paired noise per repetition.
  const int reps_fd = 10000;
  const double h = 0.1;
  for (std::size_t c = 0; c < coords.size(); ++c) {
    const std::size_t j = coords[c];
    RbfPolicy hi = policy;
    RbfPolicy lo = policy;
    std::vector<double> t = theta0;
    t[j] = theta0[j] + h;
    hi.set_theta(t);
    t[j] = theta0[j] - h;
    lo.set_theta(t);

    std::vector<double> quotients;
    quotients.reserve(reps_fd);
    for (int r = 0; r < reps_fd; ++r) {
      Rng rng_hi(9000 + static_cast<std::uint64_t>(r));
      Rng rng_lo(9000 + static_cast<std::uint64_t>(r));
      const double g_hi =
          rollout_augmented(env, hi, start, lambda, horizon, rng_hi).return_value;
      const double g_lo =
          rollout_augmented(env, lo, start, lambda, horizon, rng_lo).return_value;
      quotients.push_back((g_hi - g_lo) / (2.0 * h));
    }

    const MeanVar u = summarize(updates[c]);
    const MeanVar fd = summarize(quotients);
    const double tol = 3.0 * std::sqrt(u.se * u.se + fd.se * fd.se);
    INFO("coordinate ", j, ": reinforce ", u.mean, " +- ", u.se, ", fd ", fd.mean,
         " +- ", fd.se);
    CHECK(std::abs(u.mean - fd.mean) <= tol);
  }
}

TEST_CASE("training improves the weighted return on the arena") {
  const ContinuousMonitoringEnv env = ContinuousMonitoringEnv::default_four_region();
  RbfPolicy policy = small_policy(env, 5.0);

  TrainConfig cfg;
  cfg.iterations = 4000;
  cfg.batch = 10;
  cfg.eta_theta = 0.01;
  cfg.lambda_max = 5.0;
  cfg.curve_every = 100;
  cfg.seed = 1;
  const TrainReport report = train_acrl(env, policy, cfg);

  REQUIRE(report.curve.size() == 40);
  double early = 0.0;
  double late = 0.0;
  for (std::size_t i = 0; i < 10; ++i) {
    early += report.curve[i].mean_augmented_return;
    late += report.curve[report.curve.size() - 1 - i].mean_augmented_return;
  }
  CHECK(late / 10.0 > early / 10.0);
  CHECK(policy.theta_norm() > 0.0);
}

TEST_CASE("multiplier lattice indexing round-trips") {
  const LambdaGrid grid = LambdaGrid::uniform(2.0, 0.5, 2);
  REQUIRE(grid.axis == std::vector<double>{0.0, 0.5, 1.0, 1.5, 2.0});
  REQUIRE(grid.size() == 25);

  for (std::size_t i = 0; i < grid.size(); ++i) CHECK(grid.nearest(grid.point(i)) == i);

  // Nearest is componentwise, clamps, and resolves midpoints downward.
  CHECK(grid.point(grid.nearest({0.49, 0.0})) == std::vector<double>{0.5, 0.0});
  CHECK(grid.point(grid.nearest({10.0, -3.0})) == std::vector<double>{2.0, 0.0});
  CHECK(grid.point(grid.nearest({0.25, 1.74})) == std::vector<double>{0.0, 1.5});

  CHECK_THROWS_AS(grid.nearest({1.0}), std::invalid_argument);
  CHECK_THROWS_AS(grid.point(25), std::out_of_range);
  CHECK_THROWS_AS(LambdaGrid::uniform(2.0, 0.0, 2), std::invalid_argument);
  CHECK_THROWS_AS(LambdaGrid::uniform(-1.0, 0.5, 2), std::invalid_argument);
  CHECK_THROWS_AS(LambdaGrid::uniform(2.0, 0.5, 0), std::invalid_argument);

  const LambdaGrid single = LambdaGrid::uniform(0.0, 0.05, 2);
  CHECK(single.size() == 1);
  CHECK(single.point(0) == std::vector<double>{0.0, 0.0});
}

TEST_CASE("tabular training tabulates the case analysis over the lattice") {
  const TabularCmdp mdp = TabularCmdp::monitoring3();
  const LambdaGrid grid{{0.0, 0.5, 2.0}, 2};
  const TabularPolicyTable table = solve_tabular_training(mdp, grid);
  REQUIRE(table.reports.size() == 9);

  for (std::size_t i = 0; i < table.reports.size(); ++i) {
    const std::vector<double> lam = grid.point(i);
    const TabularPolicy& pi = table.reports[i].policy;
    if (lam[0] < 1.0 && lam[1] < 1.0) {
      // Both multipliers cheap: bounce off the home state.
      CHECK(pi.prob_of(mdp, 1, 0) == 1.0);
      CHECK(pi.prob_of(mdp, 2, 0) == 1.0);
    } else if (lam[0] > 1.0 && lam[0] > lam[1]) {
      CHECK(pi.prob_of(mdp, 1, 1) == 1.0);
      CHECK(pi.prob_of(mdp, 0, 1) == 1.0);
    } else if (lam[1] > 1.0 && lam[1] > lam[0]) {
      CHECK(pi.prob_of(mdp, 2, 2) == 1.0);
      CHECK(pi.prob_of(mdp, 0, 2) == 1.0);
    } else {
      // The lattice corner (2,2) sits on the tie ridge.
      CHECK(table.reports[i].maximizer_multiplicity);
    }
  }

  // Stationary gain spot checks: staying at region 1 at lambda=(2,0) earns
  // 2*(1 - 1/3); alternating through home at lambda=0 earns 1/2.
  const std::size_t at20 = grid.nearest({2.0, 0.0});
  CHECK(table.reports[at20].gain == doctest::Approx(4.0 / 3.0).epsilon(1e-9));
  const std::size_t at00 = grid.nearest({0.0, 0.0});
  CHECK(table.reports[at00].gain == doctest::Approx(0.5).epsilon(1e-9));

  const LambdaGrid empty{{}, 2};
  CHECK(solve_tabular_training(mdp, empty).reports.empty());
  CHECK_THROWS_AS(grid_policy_provider(solve_tabular_training(mdp, empty)),
                  std::invalid_argument);

  const LambdaGrid wrong{{0.0, 1.0}, 3};
  CHECK_THROWS_AS(solve_tabular_training(mdp, wrong), std::invalid_argument);
}

TEST_CASE("lattice-backed provider drives a feasible execution") {
  const TabularCmdp mdp = TabularCmdp::monitoring3();
  const LambdaGrid grid = LambdaGrid::uniform(2.0, 0.25, 2);
  const LambdaPolicyFn provider = grid_policy_provider(solve_tabular_training(mdp, grid));

  // Lookup snaps to the nearest lattice point.
  const TabularPolicy snapped = provider({0.26, 1.9});
  const TabularPolicy exact =
      solve_lagrangian_tabular(mdp, DualState{{0.25, 2.0}}).policy;
  for (int s = 0; s < mdp.num_states(); ++s) CHECK(snapped.row(s) == exact.row(s));

  ExecConfig cfg;
  cfg.eta_lambda = 0.5;
  cfg.t0 = 10;
  cfg.epochs = 1000;
  cfg.seed = 7;
  const ExecReport report = execute_acrl(mdp, provider, cfg);
  for (double margin : report.feasibility_margins) CHECK(margin >= -0.02);
  CHECK(report.running_average[0] >= 2.0 / 9.0 - 0.02);
}
