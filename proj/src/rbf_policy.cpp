#include "crlab/rbf_policy.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace crlab {

namespace {

void check_axis(const RbfPolicy::Axis& axis) {
  if (axis.centers.empty()) throw std::invalid_argument("RbfPolicy: empty axis");
  if (!(axis.bandwidth > 0.0))
    throw std::invalid_argument("RbfPolicy: bandwidth must be positive");
  for (std::size_t i = 1; i < axis.centers.size(); ++i)
    if (!(axis.centers[i] > axis.centers[i - 1]))
      throw std::invalid_argument("RbfPolicy: centers must be strictly ascending");
}

// One Gaussian bump per center of the axis, evaluated at x.
void axis_factors(const RbfPolicy::Axis& axis, double x, std::vector<double>& out) {
  out.resize(axis.centers.size());
  const double inv = 1.0 / (2.0 * axis.bandwidth * axis.bandwidth);
  for (std::size_t i = 0; i < axis.centers.size(); ++i) {
    const double d = x - axis.centers[i];
    out[i] = std::exp(-d * d * inv);
  }
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

RbfPolicy::RbfPolicy(std::vector<Axis> spatial_axes, std::vector<Axis> multiplier_axes,
                     double sigma)
    : spatial_axes_(std::move(spatial_axes)),
      multiplier_axes_(std::move(multiplier_axes)),
      sigma_(sigma) {
  if (spatial_axes_.size() != 2)
    throw std::invalid_argument("RbfPolicy: exactly two spatial axes required");
  if (!(sigma_ > 0.0)) throw std::invalid_argument("RbfPolicy: sigma must be positive");
  for (const auto& axis : spatial_axes_) check_axis(axis);
  for (const auto& axis : multiplier_axes_) check_axis(axis);
  feature_count_ = 1;
  for (const auto& axis : spatial_axes_)
    feature_count_ *= static_cast<int>(axis.centers.size());
  for (const auto& axis : multiplier_axes_)
    feature_count_ *= static_cast<int>(axis.centers.size());
  theta_.assign(static_cast<std::size_t>(feature_count_) * 2, 0.0);
}

RbfPolicy RbfPolicy::grid(double side, int per_spatial, int num_multipliers,
                          double lambda_max, int per_multiplier, double sigma,
                          double bandwidth_factor) {
  if (per_spatial < 2 || per_multiplier < 2)
    throw std::invalid_argument("RbfPolicy::grid: need at least two centers per axis");
  if (!(side > 0.0) || !(lambda_max > 0.0) || !(bandwidth_factor > 0.0))
    throw std::invalid_argument("RbfPolicy::grid: side, lambda_max, bandwidth_factor must be positive");
  const auto make_axis = [&](double hi, int count) {
    Axis axis;
    const double spacing = hi / (count - 1);
    for (int i = 0; i < count; ++i) axis.centers.push_back(spacing * i);
    axis.bandwidth = bandwidth_factor * spacing;
    return axis;
  };
  std::vector<Axis> spatial = {make_axis(side, per_spatial), make_axis(side, per_spatial)};
  std::vector<Axis> multipliers(num_multipliers, make_axis(lambda_max, per_multiplier));
  return RbfPolicy(std::move(spatial), std::move(multipliers), sigma);
}

void RbfPolicy::set_theta(std::vector<double> theta) {
  if (theta.size() != static_cast<std::size_t>(feature_count_) * 2)
    throw std::invalid_argument("RbfPolicy: theta must be feature_count x 2");
  for (double v : theta)
    if (!std::isfinite(v)) throw std::invalid_argument("RbfPolicy: theta must be finite");
  theta_ = std::move(theta);
}

double RbfPolicy::theta_norm() const {
  double s = 0.0;
  for (double v : theta_) s += v * v;
  return std::sqrt(s);
}

void RbfPolicy::features(const Vec2& state, const std::vector<double>& lambda,
                         std::vector<double>& phi) const {
  if (lambda.size() != multiplier_axes_.size())
    throw std::invalid_argument("RbfPolicy: multiplier size mismatch");

  std::vector<double> fx, fy;
  axis_factors(spatial_axes_[0], state.x, fx);
  axis_factors(spatial_axes_[1], state.y, fy);

  // Multiplier block: product over the multiplier axes, row-major.
  std::vector<double> block = {1.0};
  std::vector<double> factors, next;
  for (std::size_t d = 0; d < multiplier_axes_.size(); ++d) {
    const auto& axis = multiplier_axes_[d];
    const double clamped = clamp(lambda[d], axis.centers.front(), axis.centers.back());
    axis_factors(axis, clamped, factors);
    next.resize(block.size() * factors.size());
    std::size_t idx = 0;
    for (double b : block)
      for (double f : factors) next[idx++] = b * f;
    block.swap(next);
  }

  phi.resize(static_cast<std::size_t>(feature_count_));
  std::size_t idx = 0;
  for (double vx : fx)
    for (double vy : fy) {
      const double s = vx * vy;
      for (double b : block) phi[idx++] = s * b;
    }
}

Vec2 RbfPolicy::mean_from_features(const std::vector<double>& phi) const {
  double mx = 0.0, my = 0.0;
  const double* th = theta_.data();
  for (std::size_t k = 0; k < phi.size(); ++k) {
    mx += phi[k] * th[2 * k];
    my += phi[k] * th[2 * k + 1];
  }
  return {mx, my};
}

Vec2 RbfPolicy::mean(const Vec2& state, const std::vector<double>& lambda) const {
  std::vector<double> phi;
  features(state, lambda, phi);
  return mean_from_features(phi);
}

Vec2 RbfPolicy::sample_action(const Vec2& state, const std::vector<double>& lambda,
                              Rng& rng) const {
  const Vec2 mu = mean(state, lambda);
  const double zx = rng.normal();
  const double zy = rng.normal();
  return {mu.x + sigma_ * zx, mu.y + sigma_ * zy};
}

void RbfPolicy::log_prob_grad(const Vec2& state, const std::vector<double>& lambda,
                              const Vec2& action, std::vector<double>& grad) const {
  if (!action.finite())
    throw std::invalid_argument("RbfPolicy: non-finite action in log_prob_grad");
  std::vector<double> phi;
  features(state, lambda, phi);
  const Vec2 mu = mean_from_features(phi);
  const double inv_var = 1.0 / (sigma_ * sigma_);
  const double rx = (action.x - mu.x) * inv_var;
  const double ry = (action.y - mu.y) * inv_var;
  grad.resize(theta_.size());
  for (std::size_t k = 0; k < phi.size(); ++k) {
    grad[2 * k] = phi[k] * rx;
    grad[2 * k + 1] = phi[k] * ry;
  }
}

void RbfPolicy::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("RbfPolicy::save: cannot open " + path);
  out << "crlab-rbf-policy v1\n";
  out << "sigma " << format_double(sigma_) << "\n";
  const auto write_axes = [&](const char* tag, const std::vector<Axis>& axes) {
    out << tag << " " << axes.size() << "\n";
    for (const auto& axis : axes) {
      out << "axis " << axis.centers.size() << " " << format_double(axis.bandwidth);
      for (double c : axis.centers) out << " " << format_double(c);
      out << "\n";
    }
  };
  write_axes("spatial_axes", spatial_axes_);
  write_axes("multiplier_axes", multiplier_axes_);
  out << "theta " << feature_count_ << " 2\n";
  for (int k = 0; k < feature_count_; ++k)
    out << format_double(theta_[2 * k]) << " " << format_double(theta_[2 * k + 1]) << "\n";
  if (!out) throw std::runtime_error("RbfPolicy::save: write failed for " + path);
}

RbfPolicy RbfPolicy::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("RbfPolicy::load: cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line != "crlab-rbf-policy v1")
    throw std::runtime_error("RbfPolicy::load: unrecognized header in " + path);

  const auto fail = [&](const std::string& what) -> std::runtime_error {
    return std::runtime_error("RbfPolicy::load: " + what + " in " + path);
  };

  std::string tag;
  double sigma = 0.0;
  in >> tag >> sigma;
  if (!in || tag != "sigma") throw fail("missing sigma");

  const auto read_axes = [&](const char* expect) {
    std::size_t count = 0;
    in >> tag >> count;
    if (!in || tag != expect) throw fail(std::string("missing ") + expect);
    std::vector<Axis> axes(count);
    for (auto& axis : axes) {
      std::size_t centers = 0;
      in >> tag >> centers >> axis.bandwidth;
      if (!in || tag != "axis") throw fail("malformed axis");
      axis.centers.resize(centers);
      for (double& c : axis.centers)
        if (!(in >> c)) throw fail("truncated axis centers");
    }
    return axes;
  };
  auto spatial = read_axes("spatial_axes");
  auto multipliers = read_axes("multiplier_axes");

  std::size_t rows = 0, cols = 0;
  in >> tag >> rows >> cols;
  if (!in || tag != "theta" || cols != 2) throw fail("missing theta header");
  std::vector<double> theta(rows * 2);
  for (double& v : theta)
    if (!(in >> v)) throw fail("truncated theta");

  RbfPolicy policy(std::move(spatial), std::move(multipliers), sigma);
  if (rows != static_cast<std::size_t>(policy.feature_count()))
    throw fail("theta rows do not match the center grid");
  policy.set_theta(std::move(theta));
  return policy;
}

}  // namespace crlab
