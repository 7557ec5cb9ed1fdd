#pragma once

// Directionally smooth noise channels and an empirical smoothness
// certifier. A random vector is sigma_dir-directionally smooth when every
// unit projection puts mass at most delta/sigma_dir on any interval of
// half-width delta. The Gaussian channel with scale sigma claims
// sigma_dir = sqrt(2*pi)*sigma; the uniform ball of radius sigma claims
// sigma_dir = sigma/2.

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pwa/random.hpp"
#include "pwa/types.hpp"

#include "json.hpp"

namespace pwa {

struct NoiseChannel {
  enum class Kind { kGaussian, kUniformBall, kCustom };

  Kind kind = Kind::kGaussian;
  int dimension = 1;
  double sigma = 1.0;  // scale parameter of the named channels
  // Custom channels supply their own sampler and claimed constant.
  std::function<Vector(SeededRng&)> custom_sampler;
  double custom_sigma_dir = 0.0;

  static NoiseChannel gaussian(int dim, double sigma) {
    if (sigma <= 0.0)
      throw std::invalid_argument("NoiseChannel: sigma must be > 0");
    return NoiseChannel{Kind::kGaussian, dim, sigma, nullptr, 0.0};
  }
  static NoiseChannel uniform_ball(int dim, double sigma) {
    if (sigma <= 0.0)
      throw std::invalid_argument("NoiseChannel: sigma must be > 0");
    return NoiseChannel{Kind::kUniformBall, dim, sigma, nullptr, 0.0};
  }
  static NoiseChannel custom(int dim, std::function<Vector(SeededRng&)> fn,
                             double claimed_sigma_dir) {
    return NoiseChannel{Kind::kCustom, dim, 0.0, std::move(fn),
                        claimed_sigma_dir};
  }

  // Channel for a Gaussian with a target directional-smoothness constant.
  static NoiseChannel gaussian_with_sigma_dir(int dim, double sigma_dir) {
    return gaussian(dim, sigma_dir / std::sqrt(2.0 * M_PI));
  }

  double claimed_sigma_dir() const {
    switch (kind) {
      case Kind::kGaussian:
        return std::sqrt(2.0 * M_PI) * sigma;
      case Kind::kUniformBall:
        return sigma / 2.0;
      case Kind::kCustom:
        return custom_sigma_dir;
    }
    return 0.0;
  }

  Vector sample(SeededRng& rng) const {
    switch (kind) {
      case Kind::kGaussian:
        return rng.gaussian_vector(dimension, sigma);
      case Kind::kUniformBall:
        return rng.ball_vector(dimension, sigma);
      case Kind::kCustom:
        return custom_sampler(rng);
    }
    throw std::logic_error("NoiseChannel: unknown kind");
  }

  std::string kind_name() const {
    switch (kind) {
      case Kind::kGaussian: return "gaussian";
      case Kind::kUniformBall: return "uniform_ball";
      case Kind::kCustom: return "custom";
    }
    return "?";
  }
};

// z + w with w drawn from the channel.
inline Vector sample_smoothed(const Vector& z, const NoiseChannel& channel,
                              SeededRng& rng) {
  if (z.size() != channel.dimension)
    throw std::invalid_argument("sample_smoothed: dimension mismatch");
  return z + channel.sample(rng);
}

// Interval-mass certificate for directional smoothness. Normalization:
// worst_density is the sup over tested (direction, center, width) cells of
// mass / (2*delta), i.e. an average density per unit width. Two ceilings are
// compared against: 1/sigma_dir (the defining mass bound read as a density)
// and 2/sigma_dir (the Lebesgue-density ceiling every smooth projection
// obeys). The overall pass flag uses the larger ceiling, 2/sigma_dir.
struct SmoothnessReport {
  int n_samples = 0;
  int n_directions = 0;
  std::vector<double> widths;
  double claimed_sigma_dir = 0.0;
  double tolerance = 0.0;
  double worst_density = 0.0;
  double worst_center = 0.0;
  double worst_width = 0.0;
  int worst_direction = -1;
  double bound_definition = 0.0;  // 1/sigma_dir
  double bound_density = 0.0;     // 2/sigma_dir
  bool pass_definition = false;
  bool pass_density = false;
  bool pass = false;
  std::string density_normalization = "mass/(2*delta)";

  nlohmann::json to_json() const {
    return nlohmann::json{{"n_samples", n_samples},
                          {"n_directions", n_directions},
                          {"widths", widths},
                          {"claimed_sigma_dir", claimed_sigma_dir},
                          {"tolerance", tolerance},
                          {"worst_density", worst_density},
                          {"worst_center", worst_center},
                          {"worst_width", worst_width},
                          {"worst_direction", worst_direction},
                          {"bound_definition", bound_definition},
                          {"bound_density", bound_density},
                          {"pass_definition", pass_definition},
                          {"pass_density", pass_density},
                          {"pass", pass},
                          {"density_normalization", density_normalization}};
  }
};

// Estimates the worst interval mass per unit width over random unit
// directions, centers on a 64-point empirical quantile grid, and widths
// delta in {0.01, 0.05, 0.1} * sigma_dir (unless an explicit width is
// given). The quantile grid concentrates centers where the projected
// density is largest.
inline SmoothnessReport estimate_directional_smoothness(
    const NoiseChannel& channel, const Vector& z, int n_samples,
    int n_directions, double width, SeededRng& rng, double tolerance = 0.15) {
  if (n_samples < 1000)
    throw std::invalid_argument(
        "estimate_directional_smoothness: n_samples must be >= 1000");
  if (n_directions < 1)
    throw std::invalid_argument(
        "estimate_directional_smoothness: n_directions must be >= 1");

  const double sigma_dir = channel.claimed_sigma_dir();
  SmoothnessReport report;
  report.n_samples = n_samples;
  report.n_directions = n_directions;
  report.claimed_sigma_dir = sigma_dir;
  report.tolerance = tolerance;
  if (width > 0.0) {
    report.widths = {width};
  } else {
    report.widths = {0.01 * sigma_dir, 0.05 * sigma_dir, 0.1 * sigma_dir};
  }

  constexpr int kQuantiles = 64;
  std::vector<double> proj(static_cast<std::size_t>(n_samples));
  for (int dir = 0; dir < n_directions; ++dir) {
    const Vector u = rng.unit_vector(channel.dimension);
    for (int s = 0; s < n_samples; ++s)
      proj[static_cast<std::size_t>(s)] =
          u.dot(sample_smoothed(z, channel, rng));
    std::sort(proj.begin(), proj.end());

    for (int q = 0; q < kQuantiles; ++q) {
      const double frac = (q + 0.5) / kQuantiles;
      const double center =
          proj[static_cast<std::size_t>(frac * (n_samples - 1))];
      for (double delta : report.widths) {
        const auto lo = std::lower_bound(proj.begin(), proj.end(),
                                         center - delta);
        const auto hi = std::upper_bound(proj.begin(), proj.end(),
                                         center + delta);
        const double mass =
            static_cast<double>(hi - lo) / static_cast<double>(n_samples);
        const double density = mass / (2.0 * delta);
        if (density > report.worst_density) {
          report.worst_density = density;
          report.worst_center = center;
          report.worst_width = delta;
          report.worst_direction = dir;
        }
      }
    }
  }

  report.bound_definition = 1.0 / sigma_dir;
  report.bound_density = 2.0 / sigma_dir;
  report.pass_definition =
      report.worst_density <= (1.0 + tolerance) * report.bound_definition;
  report.pass_density =
      report.worst_density <= (1.0 + tolerance) * report.bound_density;
  report.pass = report.pass_density;
  return report;
}

// Smoothness constant of the concatenated vector (z, u) under a gain-K
// input channel: sigma_dir / sqrt((1 + ||K||_op)^2 + 1).
inline double concatenated_smoothness_bound(double sigma_dir, double gain_op) {
  if (sigma_dir <= 0.0)
    throw std::invalid_argument(
        "concatenated_smoothness_bound: sigma_dir must be > 0");
  if (gain_op < 0.0)
    throw std::invalid_argument(
        "concatenated_smoothness_bound: gain must be >= 0");
  return sigma_dir / std::sqrt((1.0 + gain_op) * (1.0 + gain_op) + 1.0);
}

}  // namespace pwa
