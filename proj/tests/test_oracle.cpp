#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "crlab/cmdp_oracle.hpp"
#include "crlab/rng.hpp"

using namespace crlab;

TEST_CASE("occupation LP solves the monitoring chain exactly") {
  const auto mdp = TabularCmdp::monitoring3();
  const auto result = solve_cmdp_lp(mdp);
  REQUIRE(result.feasible);
  const auto& sol = result.solution;
  CHECK(std::abs(sol.optimal_value - 1.0 / 3.0) <= 1e-9);
  for (int s = 0; s < 3; ++s)
    CHECK(std::abs(sol.state_occupation[s] - 1.0 / 3.0) <= 1e-9);

  // The occupation must be a stationary flow of the derived policy, and its
  // reward averages must reproduce the LP values.
  const auto chain = policy_chain(mdp, sol.policy);
  for (int t = 0; t < 3; ++t) {
    double inflow = 0.0;
    for (int s = 0; s < 3; ++s) inflow += sol.state_occupation[s] * chain[s][t];
    CHECK(std::abs(inflow - sol.state_occupation[t]) <= 1e-9);
  }
  double mass = 0.0;
  for (int s = 0; s < 3; ++s)
    for (double v : sol.occupation[s]) {
      CHECK(v >= 0.0);
      mass += v;
    }
  CHECK(std::abs(mass - 1.0) <= 1e-12);
}

TEST_CASE("occupation LP without constraints matches the best cycle") {
  const auto mdp = TabularCmdp::monitoring3(0.0);
  const auto result = solve_cmdp_lp(mdp);
  REQUIRE(result.feasible);
  // Alternate between R_0 and one region: half the time on the objective.
  CHECK(std::abs(result.solution.optimal_value - 0.5) <= 1e-9);

  double best = -1.0;
  for (const auto& slots : enumerate_deterministic_policies(mdp))
    for (int start = 0; start < mdp.num_states(); ++start)
      best = std::max(best, cycle_reward_average(mdp, slots, start)[0]);
  CHECK(std::abs(result.solution.optimal_value - best) <= 1e-9);
}

TEST_CASE("occupation LP reports impossible thresholds") {
  const auto mdp = TabularCmdp::monitoring3(0.6);
  const auto result = solve_cmdp_lp(mdp);
  REQUIRE_FALSE(result.feasible);
  CHECK(result.infeasibility_certificate.find("no feasible policy") != std::string::npos);
  CHECK(result.infeasibility_certificate.find("constraint") != std::string::npos);
}

TEST_CASE("dual function values at the landmark multipliers") {
  const auto mdp = TabularCmdp::monitoring3();
  CHECK(std::abs(dual_function(mdp, DualState{{0.0, 0.0}}) - 0.5) <= 1e-9);
  CHECK(std::abs(dual_function(mdp, DualState{{1.0, 1.0}}) - 1.0 / 3.0) <= 1e-9);
  CHECK(std::abs(dual_function(mdp, DualState{{2.0, 0.0}}) - 4.0 / 3.0) <= 1e-9);
}

TEST_CASE("dual function is convex and dominates the primal value") {
  const auto mdp = TabularCmdp::monitoring3();
  const double primal = solve_cmdp_lp(mdp).solution.optimal_value;
  Rng rng(31);
  for (int trial = 0; trial < 100; ++trial) {
    const std::vector<double> a = {rng.uniform(0.0, 3.0), rng.uniform(0.0, 3.0)};
    const std::vector<double> b = {rng.uniform(0.0, 3.0), rng.uniform(0.0, 3.0)};
    const std::vector<double> mid = {(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0};
    const double da = dual_function(mdp, DualState{a});
    const double db = dual_function(mdp, DualState{b});
    const double dm = dual_function(mdp, DualState{mid});
    CHECK(dm <= (da + db) / 2.0 + 1e-9);
    CHECK(da >= primal - 1e-9);
  }
}

TEST_CASE("strong duality certificate closes the gap at (1, 1)") {
  const auto mdp = TabularCmdp::monitoring3();
  const auto report = certify_strong_duality(mdp);
  CHECK(std::abs(report.primal_value - 1.0 / 3.0) <= 1e-9);
  CHECK(std::abs(report.gap) < 1e-6);
  REQUIRE(report.argmin.size() == 2);
  CHECK(std::abs(report.argmin[0] - 1.0) <= 0.01);
  CHECK(std::abs(report.argmin[1] - 1.0) <= 0.01);
  CHECK(report.worst_weak_duality_margin >= -1e-9);
}

TEST_CASE("primal recovery: the optimum maximizes, but maximizers may violate") {
  const auto mdp = TabularCmdp::monitoring3();
  const auto report = certify_primal_recovery(mdp);
  CHECK(report.primal_is_maximizer);
  CHECK(std::abs(report.lagrangian_of_primal - report.dual_value) < 1e-9);

  // At the balanced multiplier every policy is a maximizer, including ones
  // that camp on a single region and starve the other constraint.
  REQUIRE(report.strict_inclusion);
  REQUIRE(report.violated_constraint >= 1);
  CHECK(report.violating_values[report.violated_constraint] <
        mdp.thresholds()[report.violated_constraint - 1] - 1e-9);
}

TEST_CASE("primal recovery with inactive constraints is not strict") {
  const auto mdp = TabularCmdp::monitoring3(0.0);
  const auto report = certify_primal_recovery(mdp);
  CHECK(report.primal_is_maximizer);
  // Zero thresholds cannot be violated, so no strictness witness exists.
  CHECK_FALSE(report.strict_inclusion);
}
