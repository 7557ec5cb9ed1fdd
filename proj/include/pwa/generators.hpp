#pragma once

// Ground-truth instance construction: smoothed piecewise-affine regression
// streams, the binary-expansion adversarial sequence, the hard
// identification dynamics instance, and smoothly sampled well-separated
// parameters.

#include <Eigen/Core>

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

#include "pwa/dyadic.hpp"
#include "pwa/dynamics.hpp"
#include "pwa/random.hpp"
#include "pwa/smoothing.hpp"
#include "pwa/types.hpp"

namespace pwa {

// ---------------------------------------------------------------------------
// Smoothed PWA regression ground truth.

struct PwaRegressionModel {
  Dimensions dims;
  std::vector<AffineMap> maps;  // K true parameters, m x (d+1)
  AffineClassifier classifier;  // true mode selector on R^d
  Real nu = 0.0;                // response noise scale
  bool truncate_noise = false;  // resample outside radius 6*nu
  NoiseChannel channel;         // covariate smoothing
  Real eps_crp = 0.0;           // corruption budget
  Real B = 2.0;                 // bound on ||x_lift||
  Real R = 2.0;                 // Frobenius bound
  Real delta_sep = 0.0;         // claimed minimum pairwise gap

  Real min_pairwise_gap() const {
    if (maps.size() < 2) return std::numeric_limits<Real>::infinity();
    Real gap = std::numeric_limits<Real>::infinity();
    for (std::size_t i = 0; i < maps.size(); ++i)
      for (std::size_t j = i + 1; j < maps.size(); ++j)
        gap = std::min(gap, (maps[i].matrix - maps[j].matrix).norm());
    return gap;
  }

  void validate() const {
    dims.validate();
    if (static_cast<int>(maps.size()) != dims.K)
      throw std::invalid_argument("PwaRegressionModel: need K maps");
    for (const auto& map : maps) {
      if (map.matrix.rows() != dims.m || map.matrix.cols() != dims.d + 1)
        throw std::invalid_argument("PwaRegressionModel: map shape mismatch");
      if (map.matrix.norm() > R + kNormSlack)
        throw std::invalid_argument("PwaRegressionModel: ||Theta||_F > R");
    }
    if (classifier.num_modes() != dims.K ||
        classifier.covariate_dim() != dims.d)
      throw std::invalid_argument("PwaRegressionModel: classifier mismatch");
    if (min_pairwise_gap() < delta_sep - kNormSlack)
      throw std::invalid_argument(
          "PwaRegressionModel: pairwise gap below delta_sep");
    if (B <= 1.0)
      throw std::invalid_argument("PwaRegressionModel: B must exceed 1");
  }
};

inline Vector draw_response_noise(const PwaRegressionModel& model,
                                  SeededRng& rng) {
  if (model.nu <= 0.0) return Vector::Zero(model.dims.m);
  Vector e = rng.gaussian_vector(model.dims.m, model.nu);
  if (model.truncate_noise) {
    const Real cap = 6.0 * model.nu;
    while (e.norm() > cap) e = rng.gaussian_vector(model.dims.m, model.nu);
  }
  return e;
}

// Smooth z, clip the lifted covariate into the B-ball (radial rescale of x,
// keeping the offset coordinate at 1), classify, and emit the response.
inline Observation emit_observation(const PwaRegressionModel& model,
                                    const Vector& z, SeededRng& rng) {
  if (z.size() != model.dims.d)
    throw std::invalid_argument("emit_observation: dimension mismatch");
  Observation obs;
  obs.x = sample_smoothed(z, model.channel, rng);
  obs.clipped = false;
  Real lifted_norm2 = obs.x.squaredNorm() + 1.0;
  if (lifted_norm2 > model.B * model.B) {
    const Real scale =
        std::sqrt((model.B * model.B - 1.0) / obs.x.squaredNorm());
    obs.x *= scale;
    obs.clipped = true;
  }
  obs.x_lift = lift(obs.x);
  obs.hidden_mode = classify(model.classifier, obs.x);
  obs.noise = draw_response_noise(model, rng);
  if (model.eps_crp > 0.0) {
    obs.corruption = model.eps_crp * rng.unit_vector(model.dims.m);
  } else {
    obs.corruption = Vector::Zero(model.dims.m);
  }
  obs.y = model.maps[static_cast<std::size_t>(obs.hidden_mode)].apply_lifted(
              obs.x_lift) +
          obs.noise + obs.corruption;
  return obs;
}

// ---------------------------------------------------------------------------
// Covariate (z_t) policies. The general adaptive adversary is exposed as a
// callback hook; the presets below make no worst-case claim.

struct CovariatePolicy {
  enum class Kind { kFixed, kRandomWalk, kBoundaryHugging, kCallback };
  Kind kind = Kind::kFixed;
  Vector base;          // fixed point / walk origin
  Real step = 0.1;      // random-walk step scale
  Real radius = 1.0;    // confinement radius
  std::function<Vector(int, SeededRng&)> hook;

  static CovariatePolicy fixed(Vector z0) {
    CovariatePolicy p;
    p.kind = Kind::kFixed;
    p.base = std::move(z0);
    return p;
  }
  static CovariatePolicy random_walk(Vector origin, Real step, Real radius) {
    CovariatePolicy p;
    p.kind = Kind::kRandomWalk;
    p.base = std::move(origin);
    p.step = step;
    p.radius = radius;
    return p;
  }
  static CovariatePolicy boundary_hugging(Vector origin, Real radius) {
    CovariatePolicy p;
    p.kind = Kind::kBoundaryHugging;
    p.base = std::move(origin);
    p.radius = radius;
    return p;
  }
  static CovariatePolicy callback(std::function<Vector(int, SeededRng&)> fn) {
    CovariatePolicy p;
    p.kind = Kind::kCallback;
    p.hook = std::move(fn);
    return p;
  }
};

// Stateful stream of observations from a regression model under a covariate
// policy. Single-owner; distinct streams may run in parallel.
class RegressionStream {
 public:
  RegressionStream(PwaRegressionModel model, CovariatePolicy policy,
                   SeededRng rng)
      : model_(std::move(model)), policy_(std::move(policy)), rng_(rng) {
    z_ = policy_.base.size() > 0 ? policy_.base
                                 : Vector::Zero(model_.dims.d);
  }

  const PwaRegressionModel& model() const { return model_; }
  int emitted() const { return t_; }
  int clipped() const { return clipped_; }
  Real clip_rate() const {
    return t_ > 0 ? static_cast<Real>(clipped_) / t_ : 0.0;
  }

  Observation next() {
    advance_policy();
    Observation obs = emit_observation(model_, z_, rng_);
    if (obs.clipped) ++clipped_;
    ++t_;
    return obs;
  }

 private:
  void advance_policy() {
    switch (policy_.kind) {
      case CovariatePolicy::Kind::kFixed:
        z_ = policy_.base;
        break;
      case CovariatePolicy::Kind::kRandomWalk: {
        z_ += rng_.gaussian_vector(model_.dims.d, policy_.step);
        const Real n = (z_ - policy_.base).norm();
        if (n > policy_.radius)
          z_ = policy_.base + (policy_.radius / n) * (z_ - policy_.base);
        break;
      }
      case CovariatePolicy::Kind::kBoundaryHugging: {
        const int K = model_.classifier.num_modes();
        Vector p = policy_.base + rng_.ball_vector(model_.dims.d,
                                                   policy_.radius);
        if (K >= 2) {
          int i = static_cast<int>(rng_.uniform_index(K));
          int j = static_cast<int>(rng_.uniform_index(K - 1));
          if (j >= i) ++j;
          const Vector w = (model_.classifier.directions.row(i) -
                            model_.classifier.directions.row(j))
                               .transpose();
          const Real b = model_.classifier.offsets[i] -
                         model_.classifier.offsets[j];
          const Real w2 = w.squaredNorm();
          if (w2 > 1e-12) p -= ((w.dot(p) + b) / w2) * w;
        }
        z_ = p;
        break;
      }
      case CovariatePolicy::Kind::kCallback:
        z_ = policy_.hook(t_, rng_);
        break;
    }
  }

  PwaRegressionModel model_;
  CovariatePolicy policy_;
  SeededRng rng_;
  Vector z_;
  int t_ = 0;
  int clipped_ = 0;
};

// ---------------------------------------------------------------------------
// Binary-expansion adversarial threshold stream:
//   x_t = 1/2 + sum_{s<t} eps_s 2^{-s-1},  theta* = x_{T+1}.
// The side of theta* that x_t falls on is determined by eps_t alone, and all
// bookkeeping is done on exact dyadic integers scaled by 2^(T+1) so the
// labels stay consistent at any horizon. The two modes are
// Theta_1 = [0 | 1] on {x <= theta} and Theta_2 = [0 | 0] on {x > theta}.
struct AdversaryStream {
  int T = 0;
  std::vector<Real> xs;          // emitted covariates (double precision)
  std::vector<Real> ys;          // labels: 1 on the left mode, 0 on the right
  std::vector<int> eps;          // Rademacher signs +-1
  std::vector<int> hidden_modes; // 0 = left of theta*, 1 = right
  Real theta_star = 0.0;
  std::vector<DyadicInt> xs_scaled;  // x_t * 2^(T+1), exact
  DyadicInt theta_scaled;            // theta* * 2^(T+1), exact
};

inline AdversaryStream adversarial_threshold_stream(int T, SeededRng& rng) {
  if (T < 1)
    throw std::invalid_argument("adversarial_threshold_stream: T must be >= 1");
  AdversaryStream out;
  out.T = T;
  const int scale = T + 1;

  DyadicInt acc = DyadicInt::pow2(scale - 1);  // 1/2 scaled
  for (int t = 1; t <= T; ++t) {
    out.xs_scaled.push_back(acc);
    out.xs.push_back(acc.to_double(scale));
    const int e = rng.sign();
    out.eps.push_back(e);
    // eps_t = +1  =>  every later point (and theta*) lies above x_t.
    out.hidden_modes.push_back(e == 1 ? 0 : 1);
    out.ys.push_back(e == 1 ? 1.0 : 0.0);
    if (e == 1)
      acc.add_pow2(scale - t - 1);
    else
      acc.sub_pow2(scale - t - 1);
  }
  out.theta_scaled = acc;
  out.theta_star = acc.to_double(scale);
  return out;
}

// Deterministic online threshold predictors for the adversarial stream.
// Each is a function of the observed past only.
class ThresholdLearner {
 public:
  enum class Kind { kHalving, kMajority, kFollowTheLeader, kLastLabel };

  explicit ThresholdLearner(Kind kind) : kind_(kind) {}

  static ThresholdLearner by_name(const std::string& name) {
    if (name == "halving") return ThresholdLearner(Kind::kHalving);
    if (name == "majority") return ThresholdLearner(Kind::kMajority);
    if (name == "ftl") return ThresholdLearner(Kind::kFollowTheLeader);
    if (name == "last") return ThresholdLearner(Kind::kLastLabel);
    throw std::invalid_argument("unknown threshold learner: " + name);
  }

  // Predicts the label (1 = left of the threshold) for covariate x.
  Real predict(Real x) const {
    switch (kind_) {
      case Kind::kHalving: {
        if (x <= lo_) return 1.0;
        if (x >= hi_) return 0.0;
        return x < 0.5 * (lo_ + hi_) ? 1.0 : 0.0;
      }
      case Kind::kMajority:
        return ones_ * 2 >= total_ ? 1.0 : 0.0;
      case Kind::kFollowTheLeader: {
        // Best threshold on the history, split at x.
        int correct_left = 0, correct_right = 0;
        for (const auto& [xi, yi] : history_) {
          if (xi <= x && yi == 1.0) ++correct_left;
          if (xi > x && yi == 0.0) ++correct_left;
          if (xi <= x && yi == 0.0) ++correct_right;
          if (xi > x && yi == 1.0) ++correct_right;
        }
        return correct_left >= correct_right ? 1.0 : 0.0;
      }
      case Kind::kLastLabel:
        return last_;
    }
    return 1.0;
  }

  void observe(Real x, Real y) {
    ++total_;
    if (y == 1.0) ++ones_;
    last_ = y;
    if (y == 1.0)
      lo_ = std::max(lo_, x);  // theta* is above x
    else
      hi_ = std::min(hi_, x);
    if (kind_ == Kind::kFollowTheLeader) history_.emplace_back(x, y);
  }

 private:
  Kind kind_;
  Real lo_ = 0.0, hi_ = 1.0;
  int total_ = 0, ones_ = 0;
  Real last_ = 1.0;
  std::vector<std::pair<Real, Real>> history_;
};

// Mistake count of a deterministic learner on one adversarial stream.
inline int adversary_mistakes(const AdversaryStream& stream,
                              ThresholdLearner learner) {
  int mistakes = 0;
  for (int t = 0; t < stream.T; ++t) {
    const Real pred = learner.predict(stream.xs[static_cast<std::size_t>(t)]);
    if (pred != stream.ys[static_cast<std::size_t>(t)]) ++mistakes;
    learner.observe(stream.xs[static_cast<std::size_t>(t)],
                    stream.ys[static_cast<std::size_t>(t)]);
  }
  return mistakes;
}

// ---------------------------------------------------------------------------
// Hard identification instance (3-mode, 1-D dynamics):
//   x_{t+1} = u_t + m_{i_t} + w_t, regions
//   mode 1 on x <= 1+alpha, mode 3 on (1+alpha, 1+alpha+beta),
//   mode 2 on x >= 1+alpha+beta, with alpha = j/N, beta = 1/N, m_3 = iota*m.
// Scores are the construction's linear functions rescaled by 1/2 so every
// direction fits in the unit ball; a positive common rescale preserves the
// argmax regions and the lowest-index tie rule.
inline PwaDynamics hard_identification_instance(int N, int j, int iota,
                                                Real mass,
                                                const NoiseChannel& process,
                                                Real b_noise) {
  if (N < 1) throw std::invalid_argument("hard_identification_instance: N >= 1");
  if (j < 1 || j > 2 * N)
    throw std::invalid_argument("hard_identification_instance: j must be in [2N]");
  if (iota != 1 && iota != -1)
    throw std::invalid_argument("hard_identification_instance: iota must be +-1");
  const Real alpha = static_cast<Real>(j) / N;
  const Real beta = 1.0 / static_cast<Real>(N);

  PwaDynamics dyn;
  dyn.d_z = 1;
  dyn.d_u = 1;
  dyn.K = 3;
  for (int i = 0; i < 3; ++i) {
    PwaDynamics::Mode mode;
    mode.A = Matrix::Zero(1, 1);
    mode.B = Matrix::Identity(1, 1);
    mode.m = Vector::Zero(1);
    dyn.modes.push_back(mode);
  }
  dyn.modes[2].m[0] = iota * mass;

  dyn.classifier.directions = Matrix::Zero(3, 2);
  dyn.classifier.offsets = Vector::Zero(3);
  // mode 1: score 0; mode 2: z - (1+alpha) - beta/2; mode 3: (z-(1+alpha))/2
  dyn.classifier.directions(1, 0) = 1.0;
  dyn.classifier.offsets[1] = -(1.0 + alpha) - beta / 2.0;
  dyn.classifier.directions(2, 0) = 0.5;
  dyn.classifier.offsets[2] = -(1.0 + alpha) / 2.0;
  dyn.classifier.offset_bound = std::abs(dyn.classifier.offsets[1]) + 1.0;

  dyn.process_noise = process;
  dyn.b_noise = b_noise;
  return dyn;
}

// ---------------------------------------------------------------------------
// Smoothly sampled well-separated parameters. Draws K matrices (rows x cols)
// whose flattening follows the channel, reports the achieved minimum
// pairwise Frobenius gap and the separation the smoothness of the draw
// predicts at failure level delta_fail:
//   bound = D/(4*sqrt(pi)) * (sigma_dir * delta_fail / K^2)^(1/D),  D = rows*cols.
struct SeparationSample {
  std::vector<Matrix> matrices;
  Real achieved_gap = 0.0;
  Real predicted_bound = 0.0;
  int clipped = 0;  // draws radially clipped into the Frobenius ball R
};

inline Real separation_lower_bound(int dim, Real sigma_dir, Real delta_fail,
                                   int K) {
  return dim / (4.0 * std::sqrt(M_PI)) *
         std::pow(sigma_dir * delta_fail / (static_cast<Real>(K) * K),
                  1.0 / dim);
}

inline SeparationSample sample_separated_parameters(int K, int rows, int cols,
                                                    Real R,
                                                    const NoiseChannel& channel,
                                                    Real delta_fail,
                                                    SeededRng& rng) {
  const int dim = rows * cols;
  if (channel.dimension != dim)
    throw std::invalid_argument(
        "sample_separated_parameters: channel dimension must be rows*cols");
  SeparationSample out;
  for (int k = 0; k < K; ++k) {
    Vector flat = channel.sample(rng);
    if (flat.norm() > R) {
      flat *= R / flat.norm();
      ++out.clipped;
    }
    Matrix mat(rows, cols);
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c) mat(r, c) = flat[r * cols + c];
    out.matrices.push_back(mat);
  }
  out.achieved_gap = std::numeric_limits<Real>::infinity();
  for (int i = 0; i < K; ++i)
    for (int j = i + 1; j < K; ++j)
      out.achieved_gap =
          std::min(out.achieved_gap, (out.matrices[static_cast<std::size_t>(i)] -
                                      out.matrices[static_cast<std::size_t>(j)])
                                         .norm());
  out.predicted_bound =
      separation_lower_bound(dim, channel.claimed_sigma_dir(), delta_fail, K);
  return out;
}

}  // namespace pwa
