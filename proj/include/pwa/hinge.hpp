#pragma once

// Multi-class hinge loss with margin gamma on lifted covariates, its
// subgradient, projection onto the K-fold product of unit balls, and the
// single-epoch projected online gradient descent pass.

#include <Eigen/Core>

#include <stdexcept>
#include <vector>

#include "pwa/types.hpp"

namespace pwa {

// K weight vectors in R^{d+1}, each kept inside the unit ball.
struct OgdWeights {
  Matrix w;  // K x (d+1), rows w_i

  static OgdWeights zeros(int K, int lifted_dim) {
    return OgdWeights{Matrix::Zero(K, lifted_dim)};
  }

  int num_modes() const { return static_cast<int>(w.rows()); }
  int lifted_dim() const { return static_cast<int>(w.cols()); }

  int predict(const Vector& xbar) const {
    int best = 0;
    Real best_score = w.row(0).dot(xbar);
    for (int i = 1; i < num_modes(); ++i) {
      const Real s = w.row(i).dot(xbar);
      if (s > best_score) {
        best_score = s;
        best = i;
      }
    }
    return best;
  }

  bool feasible(Real slack = 1e-12) const {
    for (int i = 0; i < num_modes(); ++i)
      if (w.row(i).norm() > 1.0 + slack) return false;
    return true;
  }
};

// Per-component projection onto the unit ball; identity on feasible rows.
inline void project_unit_balls(OgdWeights& weights) {
  for (int i = 0; i < weights.num_modes(); ++i) {
    const Real n = weights.w.row(i).norm();
    if (n > 1.0) weights.w.row(i) /= n;
  }
}

// max(0, max_{j != label} 1 - <w_label - w_j, xbar> / gamma).
// K = 1 has no competitor and returns 0.
inline Real hinge_loss(const OgdWeights& weights, const Vector& xbar,
                       int label, Real gamma) {
  const int K = weights.num_modes();
  if (label < 0 || label >= K)
    throw std::out_of_range("hinge_loss: label out of range");
  if (gamma <= 0.0) throw std::invalid_argument("hinge_loss: gamma must be > 0");
  if (K == 1) return 0.0;

  const Real score_label = weights.w.row(label).dot(xbar);
  Real worst = 0.0;
  for (int j = 0; j < K; ++j) {
    if (j == label) continue;
    const Real margin = (score_label - weights.w.row(j).dot(xbar)) / gamma;
    worst = std::max(worst, 1.0 - margin);
  }
  return worst;
}

// Subgradient of hinge_loss in w. Zero when the loss is zero; otherwise the
// maximizing competitor j* (smallest index on ties) receives +xbar/gamma and
// the labeled component -xbar/gamma.
inline Matrix hinge_subgradient(const OgdWeights& weights, const Vector& xbar,
                                int label, Real gamma) {
  const int K = weights.num_modes();
  if (label < 0 || label >= K)
    throw std::out_of_range("hinge_subgradient: label out of range");
  Matrix grad = Matrix::Zero(K, weights.lifted_dim());
  if (K == 1) return grad;

  const Real score_label = weights.w.row(label).dot(xbar);
  int j_star = -1;
  Real worst = 0.0;
  for (int j = 0; j < K; ++j) {
    if (j == label) continue;
    const Real value = 1.0 - (score_label - weights.w.row(j).dot(xbar)) / gamma;
    if (value > worst) {
      worst = value;
      j_star = j;
    }
  }
  if (j_star < 0) return grad;  // flat region
  grad.row(label) = -xbar.transpose() / gamma;
  grad.row(j_star) = xbar.transpose() / gamma;
  return grad;
}

// Sequential projected OGD over one batch: w <- Pi(w - eta * subgrad) per
// sample in time order, labels supplied by the freshly fitted classifier.
inline OgdWeights ogd_epoch(OgdWeights weights,
                            const std::vector<Vector>& xbars,
                            const std::vector<int>& labels, Real gamma,
                            Real eta) {
  if (xbars.size() != labels.size())
    throw std::invalid_argument("ogd_epoch: batch size mismatch");
  for (std::size_t t = 0; t < xbars.size(); ++t) {
    const Matrix grad =
        hinge_subgradient(weights, xbars[t], labels[t], gamma);
    weights.w -= eta * grad;
    project_unit_balls(weights);
  }
  return weights;
}

// Full-batch projected subgradient minimization of the summed hinge loss;
// used to fit an argmax classifier to given labels. Returns the best
// iterate by objective value.
inline OgdWeights fit_weights_batch_hinge(const std::vector<Vector>& xbars,
                                          const std::vector<int>& labels,
                                          int K, Real gamma, int steps,
                                          OgdWeights init = OgdWeights{}) {
  if (xbars.empty())
    throw std::invalid_argument("fit_weights_batch_hinge: empty batch");
  const int lifted = static_cast<int>(xbars.front().size());
  OgdWeights w = init.w.size() > 0 ? init : OgdWeights::zeros(K, lifted);
  project_unit_balls(w);
  const Real n = static_cast<Real>(xbars.size());

  auto objective = [&](const OgdWeights& ww) {
    Real total = 0.0;
    for (std::size_t t = 0; t < xbars.size(); ++t)
      total += hinge_loss(ww, xbars[t], labels[t], gamma);
    return total / n;
  };

  OgdWeights best = w;
  Real best_obj = objective(w);
  for (int s = 1; s <= steps; ++s) {
    Matrix grad = Matrix::Zero(K, lifted);
    for (std::size_t t = 0; t < xbars.size(); ++t)
      grad += hinge_subgradient(w, xbars[t], labels[t], gamma);
    grad /= n;
    const Real step = 0.5 / std::sqrt(static_cast<Real>(s));
    w.w -= step * grad;
    project_unit_balls(w);
    const Real obj = objective(w);
    if (obj < best_obj) {
      best_obj = obj;
      best = w;
    }
  }
  return best;
}

// Reads an OgdWeights matrix as an affine classifier on x (direction = first
// d coordinates, offset = last coordinate).
inline AffineClassifier weights_to_classifier(const OgdWeights& weights,
                                              Real offset_bound) {
  AffineClassifier g;
  const int K = weights.num_modes();
  const int d = weights.lifted_dim() - 1;
  g.directions = weights.w.leftCols(d);
  g.offsets = weights.w.col(d);
  g.offset_bound = offset_bound;
  return g;
}

}  // namespace pwa
