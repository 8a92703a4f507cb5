#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <vector>

#include "crlab/rbf_policy.hpp"
#include "crlab/rng.hpp"
#include "doctest.h"

using namespace crlab;

namespace {

// log N(action; mean(theta), sigma^2 I) up to the theta-independent constant.
double log_prob(const RbfPolicy& policy, const Vec2& state,
                const std::vector<double>& lambda, const Vec2& action) {
  const Vec2 mu = policy.mean(state, lambda);
  const double dx = action.x - mu.x;
  const double dy = action.y - mu.y;
  return -(dx * dx + dy * dy) / (2.0 * policy.sigma() * policy.sigma());
}

RbfPolicy single_kernel(double cx, double cy, double bandwidth, double sigma) {
  std::vector<RbfPolicy::Axis> spatial = {{{cx}, bandwidth}, {{cy}, bandwidth}};
  return RbfPolicy(std::move(spatial), {}, sigma);
}

}  // namespace

TEST_CASE("grid factory lays out centers and bandwidths") {
  const RbfPolicy policy = RbfPolicy::grid(10.0, 3, 2, 5.0, 2, 0.5);
  CHECK(policy.feature_count() == 3 * 3 * 2 * 2);
  CHECK(policy.num_multipliers() == 2);

  const auto& sx = policy.spatial_axes()[0];
  REQUIRE(sx.centers.size() == 3);
  CHECK(sx.centers[0] == doctest::Approx(0.0));
  CHECK(sx.centers[1] == doctest::Approx(5.0));
  CHECK(sx.centers[2] == doctest::Approx(10.0));
  CHECK(sx.bandwidth == doctest::Approx(1.5 * 5.0));

  const auto& mx = policy.multiplier_axes()[1];
  REQUIRE(mx.centers.size() == 2);
  CHECK(mx.centers[1] == doctest::Approx(5.0));
  CHECK(mx.bandwidth == doctest::Approx(1.5 * 5.0));
}

TEST_CASE("zero weights give the zero mean everywhere") {
  const RbfPolicy policy = RbfPolicy::grid(10.0, 4, 3, 5.0, 3, 0.5);
  Rng rng(99);
  std::vector<double> lambda(3);
  for (int trial = 0; trial < 25; ++trial) {
    const Vec2 s{rng.uniform(0.0, 10.0), rng.uniform(0.0, 10.0)};
    for (double& v : lambda) v = rng.uniform(0.0, 5.0);
    const Vec2 mu = policy.mean(s, lambda);
    CHECK(mu.x == 0.0);
    CHECK(mu.y == 0.0);
  }
}

TEST_CASE("a lone kernel reproduces its weight at the center") {
  RbfPolicy policy = single_kernel(2.0, 3.0, 1.0, 0.5);
  REQUIRE(policy.feature_count() == 1);
  policy.set_theta({0.7, -0.4});

  std::vector<double> phi;
  policy.features({2.0, 3.0}, {}, phi);
  REQUIRE(phi.size() == 1);
  CHECK(phi[0] == doctest::Approx(1.0));

  const Vec2 mu = policy.mean({2.0, 3.0}, {});
  CHECK(mu.x == doctest::Approx(0.7));
  CHECK(mu.y == doctest::Approx(-0.4));

  // One bandwidth away along x the bump decays by exp(-1/2).
  const Vec2 off = policy.mean({3.0, 3.0}, {});
  CHECK(off.x == doctest::Approx(0.7 * std::exp(-0.5)));
}

TEST_CASE("means far from every center are negligible") {
  RbfPolicy policy = RbfPolicy::grid(4.0, 3, 1, 2.0, 2, 0.5, 0.5);
  std::vector<double> theta(policy.theta().size(), 1.0);
  policy.set_theta(theta);
  const Vec2 mu = policy.mean({200.0, 200.0}, {1.0});
  CHECK(std::abs(mu.x) < 1e-8);
  CHECK(std::abs(mu.y) < 1e-8);
}

TEST_CASE("feature blocks multiply spatial and multiplier factors") {
  std::vector<RbfPolicy::Axis> spatial = {{{0.0, 2.0}, 1.0}, {{0.0}, 1.0}};
  std::vector<RbfPolicy::Axis> mult = {{{0.0, 1.0}, 2.0}};
  const RbfPolicy policy(std::move(spatial), std::move(mult), 0.5);
  REQUIRE(policy.feature_count() == 4);

  const Vec2 s{1.0, 0.5};
  const double lam = 0.25;
  std::vector<double> phi;
  policy.features(s, {lam}, phi);

  const auto bump = [](double x, double c, double b) {
    return std::exp(-(x - c) * (x - c) / (2.0 * b * b));
  };
  const double gy = bump(0.5, 0.0, 1.0);
  // Row-major: spatial index (x slow, y fast) times multiplier index fast.
  CHECK(phi[0] == doctest::Approx(bump(1.0, 0.0, 1.0) * gy * bump(lam, 0.0, 2.0)));
  CHECK(phi[1] == doctest::Approx(bump(1.0, 0.0, 1.0) * gy * bump(lam, 1.0, 2.0)));
  CHECK(phi[2] == doctest::Approx(bump(1.0, 2.0, 1.0) * gy * bump(lam, 0.0, 2.0)));
  CHECK(phi[3] == doctest::Approx(bump(1.0, 2.0, 1.0) * gy * bump(lam, 1.0, 2.0)));
}

TEST_CASE("multipliers beyond the center box are clamped") {
  const RbfPolicy policy = RbfPolicy::grid(4.0, 2, 2, 2.0, 3, 0.5);
  std::vector<double> at_edge, beyond;
  policy.features({1.0, 3.0}, {2.0, 0.0}, at_edge);
  policy.features({1.0, 3.0}, {17.5, 0.0}, beyond);
  REQUIRE(at_edge.size() == beyond.size());
  for (std::size_t k = 0; k < at_edge.size(); ++k) CHECK(at_edge[k] == beyond[k]);

  std::vector<double> neg;
  policy.features({1.0, 3.0}, {2.0, -4.0}, neg);
  std::vector<double> at_zero;
  policy.features({1.0, 3.0}, {2.0, 0.0}, at_zero);
  for (std::size_t k = 0; k < neg.size(); ++k) CHECK(neg[k] == at_zero[k]);
}

TEST_CASE("score is zero when the action equals the mean") {
  RbfPolicy policy = RbfPolicy::grid(4.0, 2, 1, 2.0, 2, 0.7);
  Rng rng(5);
  std::vector<double> theta(policy.theta().size());
  for (double& v : theta) v = rng.uniform(-1.0, 1.0);
  policy.set_theta(theta);

  const Vec2 s{1.3, 2.8};
  const std::vector<double> lambda = {0.6};
  std::vector<double> grad;
  policy.log_prob_grad(s, lambda, policy.mean(s, lambda), grad);
  for (double g : grad) CHECK(std::abs(g) < 1e-12);
}

TEST_CASE("score matches central finite differences") {
  RbfPolicy policy = RbfPolicy::grid(4.0, 2, 1, 2.0, 2, 0.7);
  Rng rng(31);
  const double h = 1e-5;

  for (int draw = 0; draw < 20; ++draw) {
    std::vector<double> theta(policy.theta().size());
    for (double& v : theta) v = rng.uniform(-1.0, 1.0);
    policy.set_theta(theta);

    for (int pt = 0; pt < 5; ++pt) {
      const Vec2 s{rng.uniform(0.0, 4.0), rng.uniform(0.0, 4.0)};
      const std::vector<double> lambda = {rng.uniform(0.0, 2.0)};
      const Vec2 mu = policy.mean(s, lambda);
      const Vec2 a{mu.x + 0.7 * rng.normal(), mu.y + 0.7 * rng.normal()};

      std::vector<double> grad;
      policy.log_prob_grad(s, lambda, a, grad);

      for (std::size_t k = 0; k < theta.size(); k += 3) {
        std::vector<double> bumped = theta;
        bumped[k] = theta[k] + h;
        policy.set_theta(bumped);
        const double up = log_prob(policy, s, lambda, a);
        bumped[k] = theta[k] - h;
        policy.set_theta(bumped);
        const double down = log_prob(policy, s, lambda, a);
        policy.set_theta(theta);

        const double fd = (up - down) / (2.0 * h);
        CHECK(std::abs(fd - grad[k]) <= 1e-6 + 1e-5 * std::abs(grad[k]));
      }
    }
  }
}

TEST_CASE("sampling is reproducible and centered on the mean") {
  RbfPolicy policy = RbfPolicy::grid(4.0, 2, 1, 2.0, 2, 0.5);
  std::vector<double> theta(policy.theta().size(), 0.3);
  policy.set_theta(theta);
  const Vec2 s{2.0, 2.0};
  const std::vector<double> lambda = {1.0};

  Rng a(123), b(123);
  for (int i = 0; i < 10; ++i) {
    const Vec2 va = policy.sample_action(s, lambda, a);
    const Vec2 vb = policy.sample_action(s, lambda, b);
    CHECK(va.x == vb.x);
    CHECK(va.y == vb.y);
  }

  Rng rng(7);
  const Vec2 mu = policy.mean(s, lambda);
  const int n = 20000;
  double sx = 0.0, sy = 0.0;
  for (int i = 0; i < n; ++i) {
    const Vec2 v = policy.sample_action(s, lambda, rng);
    sx += v.x;
    sy += v.y;
  }
  // Four standard errors of the sample mean at sigma = 0.5.
  const double band = 4.0 * 0.5 / std::sqrt(static_cast<double>(n));
  CHECK(std::abs(sx / n - mu.x) < band);
  CHECK(std::abs(sy / n - mu.y) < band);
}

TEST_CASE("constructor and setter reject malformed input") {
  CHECK_THROWS_AS(RbfPolicy::grid(4.0, 2, 1, 2.0, 2, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(RbfPolicy::grid(4.0, 1, 1, 2.0, 2, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(RbfPolicy::grid(4.0, 2, 1, 2.0, 1, 0.5), std::invalid_argument);

  std::vector<RbfPolicy::Axis> one_axis = {{{0.0, 1.0}, 1.0}};
  CHECK_THROWS_AS(RbfPolicy(one_axis, {}, 0.5), std::invalid_argument);

  std::vector<RbfPolicy::Axis> unsorted = {{{1.0, 0.0}, 1.0}, {{0.0, 1.0}, 1.0}};
  CHECK_THROWS_AS(RbfPolicy(unsorted, {}, 0.5), std::invalid_argument);

  RbfPolicy policy = RbfPolicy::grid(4.0, 2, 1, 2.0, 2, 0.5);
  CHECK_THROWS_AS(policy.set_theta(std::vector<double>(3, 0.0)), std::invalid_argument);
  std::vector<double> nan_theta(policy.theta().size(), 0.0);
  nan_theta[1] = std::nan("");
  CHECK_THROWS_AS(policy.set_theta(nan_theta), std::invalid_argument);

  std::vector<double> wrong_lambda = {0.0, 0.0};
  std::vector<double> phi;
  CHECK_THROWS_AS(policy.features({0.0, 0.0}, wrong_lambda, phi), std::invalid_argument);
}

TEST_CASE("checkpoints round-trip weights bit for bit") {
  RbfPolicy policy = RbfPolicy::grid(10.0, 3, 2, 5.0, 3, 0.5);
  Rng rng(42);
  std::vector<double> theta(policy.theta().size());
  for (double& v : theta) v = rng.normal() * 0.37;
  policy.set_theta(theta);

  const std::string path = "rbf_roundtrip.chk";
  policy.save(path);
  const RbfPolicy loaded = RbfPolicy::load(path);
  std::remove(path.c_str());

  CHECK(loaded.feature_count() == policy.feature_count());
  CHECK(loaded.sigma() == policy.sigma());
  CHECK(loaded.num_multipliers() == policy.num_multipliers());
  REQUIRE(loaded.theta().size() == policy.theta().size());
  for (std::size_t k = 0; k < theta.size(); ++k) CHECK(loaded.theta()[k] == theta[k]);
  for (std::size_t d = 0; d < 2; ++d) {
    CHECK(loaded.spatial_axes()[d].bandwidth == policy.spatial_axes()[d].bandwidth);
    CHECK(loaded.spatial_axes()[d].centers == policy.spatial_axes()[d].centers);
  }
}

TEST_CASE("loading rejects missing or corrupt checkpoints") {
  CHECK_THROWS_AS(RbfPolicy::load("no_such_checkpoint.chk"), std::runtime_error);

  const std::string path = "rbf_corrupt.chk";
  {
    std::ofstream out(path);
    out << "some other format v7\n";
  }
  CHECK_THROWS_AS(RbfPolicy::load(path), std::runtime_error);

  {
    std::ofstream out(path);
    out << "crlab-rbf-policy v1\nsigma 0.5\nspatial_axes 2\naxis 2 1.0 0 4\n";
  }
  CHECK_THROWS_AS(RbfPolicy::load(path), std::runtime_error);
  std::remove(path.c_str());
}
