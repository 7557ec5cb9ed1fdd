#pragma once

// Core value types for piecewise-affine regression: lifted covariates,
// per-mode affine maps, and argmax affine classifiers.

#include <Eigen/Core>

#include <limits>
#include <stdexcept>
#include <vector>

namespace pwa {

using Real = double;
template <typename Scalar>
using MatX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VecX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
using Matrix = MatX<Real>;
using Vector = VecX<Real>;

constexpr Real kNormSlack = 1e-9;

struct Dimensions {
  int d = 1;  // covariate dimension
  int m = 1;  // response dimension
  int K = 1;  // number of modes

  void validate() const {
    if (d < 1 || m < 1 || K < 1)
      throw std::invalid_argument("Dimensions: d, m, K must all be >= 1");
  }
};

// Appends the constant coordinate: x in R^d -> [x | 1] in R^{d+1}.
template <typename Derived>
VecX<typename Derived::Scalar> lift(const Eigen::MatrixBase<Derived>& x) {
  VecX<typename Derived::Scalar> out(x.size() + 1);
  out.head(x.size()) = x;
  out[x.size()] = typename Derived::Scalar(1);
  return out;
}

// One mode's regression parameter, an m x (d+1) matrix whose last column is
// the affine offset. Frobenius norm is kept within `frobenius_bound`.
template <typename Scalar>
struct AffineMapT {
  MatX<Scalar> matrix;
  Scalar frobenius_bound = Scalar(0);

  int response_dim() const { return static_cast<int>(matrix.rows()); }
  int lifted_dim() const { return static_cast<int>(matrix.cols()); }

  VecX<Scalar> apply_lifted(const VecX<Scalar>& xbar) const {
    return matrix * xbar;
  }

  bool feasible(Scalar slack = Scalar(kNormSlack)) const {
    return matrix.norm() <= frobenius_bound + slack;
  }

  // Radial projection onto the Frobenius ball.
  void project_to_ball() {
    const Scalar n = matrix.norm();
    if (n > frobenius_bound && n > Scalar(0))
      matrix *= frobenius_bound / n;
  }
};
using AffineMap = AffineMapT<Real>;

// Argmax-of-affine-scores classifier over K modes: unit-ball directions w_i,
// offsets b_i, ties resolved to the smallest index.
template <typename Scalar>
struct AffineClassifierT {
  MatX<Scalar> directions;  // K x d, rows w_i with ||w_i|| <= 1
  VecX<Scalar> offsets;     // K, entries in [-C, C]
  Scalar offset_bound = Scalar(0);

  int num_modes() const { return static_cast<int>(directions.rows()); }
  int covariate_dim() const { return static_cast<int>(directions.cols()); }

  bool feasible(Scalar direction_slack = Scalar(1e-12)) const {
    for (int i = 0; i < num_modes(); ++i)
      if (directions.row(i).norm() > Scalar(1) + direction_slack) return false;
    return offsets.cwiseAbs().maxCoeff() <= offset_bound + Scalar(kNormSlack);
  }
};
using AffineClassifier = AffineClassifierT<Real>;

// argmax_i <w_i, x> + b_i, lowest index on ties. Deterministic.
template <typename Scalar, typename Derived>
int classify(const AffineClassifierT<Scalar>& g,
             const Eigen::MatrixBase<Derived>& x) {
  if (x.size() != g.covariate_dim())
    throw std::invalid_argument("classify: covariate dimension mismatch");
  int best = 0;
  Scalar best_score = g.directions.row(0).dot(x) + g.offsets[0];
  for (int i = 1; i < g.num_modes(); ++i) {
    const Scalar s = g.directions.row(i).dot(x) + g.offsets[i];
    if (s > best_score) {
      best_score = s;
      best = i;
    }
  }
  return best;
}

// One emitted sample. Generator-side fields (hidden_mode, noise, corruption)
// are never shown to the learner.
struct Observation {
  Vector x;        // covariate in R^d
  Vector x_lift;   // [x | 1]
  Vector y;        // response in R^m
  int hidden_mode = 0;
  Vector noise;        // e
  Vector corruption;   // delta, ||delta|| <= eps_crp
  bool clipped = false;  // covariate was rescaled to satisfy ||x_lift|| <= B
};

inline Real squared_norm(const Vector& v) { return v.squaredNorm(); }

}  // namespace pwa
