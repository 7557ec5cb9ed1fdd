#pragma once

// Deterministic seeded randomness. Standard-library distributions are not
// bit-stable across implementations, so the generator and every transform
// used by the project are spelled out here:
//
//   state     xoshiro256++ (Blackman & Vigna), state expanded from
//             (seed, stream) via splitmix64
//   uniform   53-bit mantissa draw in [0, 1)
//   gaussian  Box-Muller on two uniforms, second value cached
//   ball      gaussian direction, radius r = R * u^(1/d)
//
// Identical (seed, stream) pairs reproduce identical draws on every
// platform with IEEE-754 doubles.

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace pwa {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& x) {
  x += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline std::uint64_t rotl(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}

}  // namespace detail

class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed, std::uint64_t stream = 0)
      : seed_(seed), stream_(stream) {
    std::uint64_t mix = seed ^ (0xD1B54A32D192ED03ULL * (stream + 1));
    for (auto& s : state_) s = detail::splitmix64(mix);
  }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

  // Independent generator for a named sub-stream of this one.
  SeededRng substream(std::uint64_t tag) const {
    return SeededRng(seed_ ^ detail::rotl(tag + 0x632BE59BD9B4E019ULL, 17),
                     stream_ * 0x100000001B3ULL + tag + 1);
  }

  std::uint64_t next_u64() {
    const std::uint64_t result =
        detail::rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = detail::rotl(state_[3], 45);
    return result;
  }

  // Uniform in [0, 1).
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in {0, ..., n-1} (n > 0), by rejection on the top range.
  std::uint64_t uniform_index(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("uniform_index: n must be > 0");
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t v;
    do {
      v = next_u64();
    } while (v >= limit);
    return v % n;
  }

  // Standard normal via Box-Muller; deterministic pair caching.
  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  Eigen::VectorXd gaussian_vector(int dim, double sigma = 1.0) {
    Eigen::VectorXd v(dim);
    for (int i = 0; i < dim; ++i) v[i] = sigma * gaussian();
    return v;
  }

  // Uniform on the Euclidean ball of given radius.
  Eigen::VectorXd ball_vector(int dim, double radius) {
    Eigen::VectorXd dir = gaussian_vector(dim, 1.0);
    double norm = dir.norm();
    while (norm == 0.0) {  // essentially impossible, kept for determinism
      dir = gaussian_vector(dim, 1.0);
      norm = dir.norm();
    }
    const double r =
        radius * std::pow(uniform(), 1.0 / static_cast<double>(dim));
    return (r / norm) * dir;
  }

  Eigen::VectorXd unit_vector(int dim) {
    Eigen::VectorXd dir = gaussian_vector(dim, 1.0);
    double norm = dir.norm();
    while (norm == 0.0) {
      dir = gaussian_vector(dim, 1.0);
      norm = dir.norm();
    }
    return dir / norm;
  }

  // Rademacher sign.
  int sign() { return (next_u64() >> 63) ? 1 : -1; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t state_[4];
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace pwa
