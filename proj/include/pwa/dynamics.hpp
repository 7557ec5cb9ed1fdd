#pragma once

// Piecewise-affine dynamical systems: state evolution with a mode selector
// on (z, u), gain-scheduled smoothed inputs, one-step prediction through the
// online learner, and projection of state matrices onto the Lyapunov cone
// C_P = { A : A^T P A <= P }.

#include <Eigen/Core>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "pwa/learner.hpp"
#include "pwa/smoothing.hpp"
#include "pwa/types.hpp"

namespace pwa {

struct PwaDynamics {
  struct Mode {
    Matrix A;  // d_z x d_z
    Matrix B;  // d_z x d_u
    Vector m;  // d_z
  };

  int d_z = 1;
  int d_u = 1;
  int K = 1;
  std::vector<Mode> modes;
  AffineClassifier classifier;  // on the concatenation [z; u]
  NoiseChannel process_noise;   // D
  Real b_noise = 0.0;           // hard bound on ||e||; 0 disables noise
  Matrix lyapunov;              // optional P (empty when unused)

  void validate() const {
    if (static_cast<int>(modes.size()) != K)
      throw std::invalid_argument("PwaDynamics: need K modes");
    for (const auto& mode : modes) {
      if (mode.A.rows() != d_z || mode.A.cols() != d_z ||
          mode.B.rows() != d_z || mode.B.cols() != d_u ||
          mode.m.size() != d_z)
        throw std::invalid_argument("PwaDynamics: mode shape mismatch");
    }
    if (classifier.num_modes() != K ||
        classifier.covariate_dim() != d_z + d_u)
      throw std::invalid_argument("PwaDynamics: classifier mismatch");
    if (lyapunov.size() > 0) {
      for (const auto& mode : modes) {
        Matrix gap = lyapunov - mode.A.transpose() * lyapunov * mode.A;
        Eigen::SelfAdjointEigenSolver<Matrix> eig(gap);
        if (eig.eigenvalues().minCoeff() < -kNormSlack)
          throw std::invalid_argument(
              "PwaDynamics: mode violates the Lyapunov condition");
      }
    }
  }

  // The per-mode parameter as a regression map [A | B | m].
  AffineMap mode_as_map(int i, Real R) const {
    AffineMap map;
    map.matrix = Matrix(d_z, d_z + d_u + 1);
    map.matrix.leftCols(d_z) = modes[static_cast<std::size_t>(i)].A;
    map.matrix.middleCols(d_z, d_u) = modes[static_cast<std::size_t>(i)].B;
    map.matrix.col(d_z + d_u) = modes[static_cast<std::size_t>(i)].m;
    map.frobenius_bound = R;
    return map;
  }

  std::vector<AffineMap> as_maps(Real R) const {
    std::vector<AffineMap> maps;
    for (int i = 0; i < K; ++i) maps.push_back(mode_as_map(i, R));
    return maps;
  }
};

inline Vector draw_process_noise(const PwaDynamics& dyn, SeededRng& rng) {
  if (dyn.b_noise <= 0.0) return Vector::Zero(dyn.d_z);
  Vector e = dyn.process_noise.sample(rng);
  while (e.norm() > dyn.b_noise) e = dyn.process_noise.sample(rng);
  return e;
}

struct StepResult {
  Vector z_next;
  int mode = 0;
  Vector noise;
};

inline StepResult step(const PwaDynamics& dyn, const Vector& z,
                       const Vector& u, SeededRng& rng) {
  if (z.size() != dyn.d_z || u.size() != dyn.d_u)
    throw std::invalid_argument("step: dimension mismatch");
  Vector zu(dyn.d_z + dyn.d_u);
  zu.head(dyn.d_z) = z;
  zu.tail(dyn.d_u) = u;
  StepResult result;
  result.mode = classify(dyn.classifier, zu);
  result.noise = draw_process_noise(dyn, rng);
  const auto& mode = dyn.modes[static_cast<std::size_t>(result.mode)];
  result.z_next = mode.A * z + mode.B * u + mode.m + result.noise;
  return result;
}

// ---------------------------------------------------------------------------
// Input policies.

// Gain-scheduled feedback u_t = Kbar * z_t + ubar + ebar with exploration
// noise ebar drawn from a smooth channel; or open-loop stochastic episodic
// inputs (state-independent draws per step).
struct InputPolicy {
  Matrix gain;           // d_u x d_z (zero for open loop)
  Vector nominal;        // ubar
  NoiseChannel exploration;  // channel for ebar / open-loop noise

  Vector draw(const Vector& z, SeededRng& rng) const {
    Vector u = nominal;
    if (gain.size() > 0) u += gain * z;
    u += exploration.sample(rng);
    return u;
  }

  Vector draw_open_loop(SeededRng& rng) const {
    return nominal + exploration.sample(rng);
  }

  Real gain_operator_norm() const {
    if (gain.size() == 0) return 0.0;
    Eigen::JacobiSVD<Matrix> svd(gain);
    return svd.singularValues().maxCoeff();
  }
};

// ---------------------------------------------------------------------------
// Lyapunov-cone projection.
//
// Only the A-block of [A | B | m] is constrained. The projection whitens
// A' = P^(1/2) A P^(-1/2), clips singular values to 1, and unwhitens; this
// is the exact projection in the P-weighted Frobenius norm and always lands
// in the cone. An optional projected-gradient refinement approximates the
// plain-Frobenius projection while keeping feasibility at every iterate.
inline AffineMap project_to_lyapunov_cone(const AffineMap& theta,
                                          const Matrix& P,
                                          bool refine_plain_frobenius = false,
                                          int refine_iters = 200) {
  const int d_z = static_cast<int>(P.rows());
  if (P.rows() != P.cols())
    throw std::invalid_argument("project_to_lyapunov_cone: P must be square");
  if (theta.matrix.rows() != d_z || theta.matrix.cols() < d_z)
    throw std::invalid_argument(
        "project_to_lyapunov_cone: A-block shape mismatch");

  Eigen::SelfAdjointEigenSolver<Matrix> eig(P);
  if (eig.eigenvalues().minCoeff() <= 0.0)
    throw std::invalid_argument(
        "project_to_lyapunov_cone: P must be positive definite");
  const Matrix sqrt_p = eig.operatorSqrt();
  const Matrix sqrt_p_inv = eig.operatorInverseSqrt();

  auto clip_whitened = [&](const Matrix& whitened) {
    Eigen::JacobiSVD<Matrix> svd(whitened,
                                 Eigen::ComputeFullU | Eigen::ComputeFullV);
    Vector s = svd.singularValues();
    for (int i = 0; i < s.size(); ++i) s[i] = std::min(s[i], Real(1));
    return Matrix(svd.matrixU() * s.asDiagonal() *
                  svd.matrixV().transpose());
  };

  const Matrix A = theta.matrix.leftCols(d_z);
  Matrix whitened = clip_whitened(sqrt_p * A * sqrt_p_inv);

  if (refine_plain_frobenius) {
    // Projected gradient on 0.5 * || P^(-1/2) W P^(1/2) - A ||_F^2 over
    // the whitened operator-norm ball.
    const Real cond = eig.eigenvalues().maxCoeff() / eig.eigenvalues().minCoeff();
    const Real step = 1.0 / cond;
    for (int it = 0; it < refine_iters; ++it) {
      const Matrix residual = sqrt_p_inv * whitened * sqrt_p - A;
      const Matrix grad = sqrt_p_inv * residual * sqrt_p;
      whitened = clip_whitened(whitened - step * grad);
    }
  }

  AffineMap out = theta;
  out.matrix.leftCols(d_z) = sqrt_p_inv * whitened * sqrt_p;
  return out;
}

inline bool lyapunov_feasible(const Matrix& A, const Matrix& P,
                              Real tol = 1e-8) {
  Matrix gap = P - A.transpose() * P * A;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(gap);
  return eig.eigenvalues().minCoeff() >= -tol;
}

// ---------------------------------------------------------------------------
// One-step prediction: the regression learner run on covariates x = [z | u]
// and responses y = z_{t+1}, with Theta* = [A | B | m].

struct OneStepOptions {
  LearnerOptions learner;
  Real R = 10.0;       // Frobenius bound handed to the oracle
  Real B = 50.0;       // lifted-covariate bound (generous; no clipping)
  Vector z0;           // initial state
};

inline RunReport one_step_prediction_run(const PwaDynamics& dyn,
                                         const InputPolicy& policy, int T,
                                         const OneStepOptions& options,
                                         SeededRng rng) {
  dyn.validate();
  Dimensions dims{dyn.d_z + dyn.d_u, dyn.d_z, dyn.K};
  std::vector<AffineMap> true_maps = dyn.as_maps(options.R);

  SeededRng sys_rng = rng.substream(1);
  Vector z = options.z0.size() > 0 ? options.z0 : Vector::Zero(dyn.d_z);
  Real noise_floor = 0.0;

  auto stream = [&]() {
    Observation obs;
    const Vector u = policy.draw(z, sys_rng);
    Vector zu(dyn.d_z + dyn.d_u);
    zu.head(dyn.d_z) = z;
    zu.tail(dyn.d_u) = u;
    obs.x = zu;
    obs.x_lift = lift(zu);
    StepResult next = step(dyn, z, u, sys_rng);
    obs.hidden_mode = next.mode;
    obs.noise = next.noise;
    obs.corruption = Vector::Zero(dyn.d_z);
    obs.y = next.z_next;
    obs.clipped = false;
    noise_floor += next.noise.squaredNorm();
    z = next.z_next;
    return obs;
  };

  RunReport report =
      run_online_learner(stream, T, dims, options.R, options.learner,
                         &true_maps, rng.substream(2));
  report.noise_floor = noise_floor;
  report.covariate_smoothness = concatenated_smoothness_bound(
      dyn.process_noise.claimed_sigma_dir(), policy.gain_operator_norm());
  return report;
}

}  // namespace pwa
