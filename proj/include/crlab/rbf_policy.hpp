#pragma once

#include <string>
#include <vector>

#include "crlab/geometry.hpp"
#include "crlab/rng.hpp"

namespace crlab {

/// Gaussian policy over 2-d displacement actions whose mean is a linear
/// combination of radial basis features on the augmented space
/// (position, multipliers). Centers sit on an axis-aligned grid; a feature
/// is the product of one Gaussian bump per axis. Multipliers are clamped to
/// the center box before feature evaluation, so queries beyond the trained
/// range degrade gracefully instead of vanishing.
class RbfPolicy {
 public:
  struct Axis {
    std::vector<double> centers;  // ascending
    double bandwidth;
  };

  RbfPolicy(std::vector<Axis> spatial_axes, std::vector<Axis> multiplier_axes,
            double sigma);

  /// Uniform grid: per_spatial centers per spatial axis over [0, side] and
  /// per_multiplier centers per multiplier axis over [0, lambda_max], with
  /// bandwidth bandwidth_factor times the center spacing.
  static RbfPolicy grid(double side, int per_spatial, int num_multipliers,
                        double lambda_max, int per_multiplier, double sigma,
                        double bandwidth_factor = 1.5);

  int feature_count() const { return feature_count_; }
  int num_multipliers() const { return static_cast<int>(multiplier_axes_.size()); }
  double sigma() const { return sigma_; }
  const std::vector<Axis>& spatial_axes() const { return spatial_axes_; }
  const std::vector<Axis>& multiplier_axes() const { return multiplier_axes_; }

  /// theta is feature_count x 2, row-major; validated finite.
  const std::vector<double>& theta() const { return theta_; }
  void set_theta(std::vector<double> theta);
  double theta_norm() const;

  /// Product-Gaussian feature vector at (state, lambda); phi is resized.
  void features(const Vec2& state, const std::vector<double>& lambda,
                std::vector<double>& phi) const;

  Vec2 mean_from_features(const std::vector<double>& phi) const;
  Vec2 mean(const Vec2& state, const std::vector<double>& lambda) const;

  /// mean(state, lambda) + sigma * z with z standard normal (x draw first).
  Vec2 sample_action(const Vec2& state, const std::vector<double>& lambda,
                     Rng& rng) const;

  /// Gradient of log N(action; mean, sigma^2 I) with respect to theta:
  /// outer(phi, (action - mean) / sigma^2), laid out like theta.
  void log_prob_grad(const Vec2& state, const std::vector<double>& lambda,
                     const Vec2& action, std::vector<double>& grad) const;

  /// Versioned text serialization; round-trips theta bit-exactly.
  void save(const std::string& path) const;
  static RbfPolicy load(const std::string& path);

 private:
  std::vector<Axis> spatial_axes_;
  std::vector<Axis> multiplier_axes_;
  double sigma_;
  int feature_count_;
  std::vector<double> theta_;
};

}  // namespace crlab
