#pragma once

// Squared Wasserstein-2 distance between two equal-size empirical measures,
// computed exactly via an optimal assignment on squared Euclidean costs.

#include <Eigen/Core>

#include <stdexcept>

#include "pwa/assignment.hpp"

namespace pwa {

constexpr int kWasserstein2MaxSamples = 512;

// samples_a / samples_b: one sample per row, equal counts n <= 512.
// Returns (1/n) * min_perm sum_i ||a_i - b_perm(i)||^2.
inline double wasserstein2_empirical(const Eigen::MatrixXd& samples_a,
                                     const Eigen::MatrixXd& samples_b) {
  if (samples_a.rows() != samples_b.rows() ||
      samples_a.cols() != samples_b.cols())
    throw std::invalid_argument("wasserstein2_empirical: size mismatch");
  const int n = static_cast<int>(samples_a.rows());
  if (n == 0) throw std::invalid_argument("wasserstein2_empirical: empty");
  if (n > kWasserstein2MaxSamples)
    throw std::invalid_argument(
        "wasserstein2_empirical: at most 512 samples supported");

  Eigen::MatrixXd cost(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      cost(i, j) = (samples_a.row(i) - samples_b.row(j)).squaredNorm();
  const auto assignment = solve_assignment(cost);
  return assignment_cost(cost, assignment) / static_cast<double>(n);
}

// Identity-coupling estimate: pairs row i with row i. Upper-bounds the
// assignment value for the same batches.
inline double wasserstein2_coupled(const Eigen::MatrixXd& samples_a,
                                   const Eigen::MatrixXd& samples_b) {
  if (samples_a.rows() != samples_b.rows() ||
      samples_a.cols() != samples_b.cols())
    throw std::invalid_argument("wasserstein2_coupled: size mismatch");
  const int n = static_cast<int>(samples_a.rows());
  if (n == 0) throw std::invalid_argument("wasserstein2_coupled: empty");
  return (samples_a - samples_b).rowwise().squaredNorm().mean();
}

}  // namespace pwa
