#pragma once

// Ground-truth-aware evaluation: label matching, per-pair covariance
// spectra, recovery curves, and the run report emitted by the online
// learner.

#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "pwa/assignment.hpp"
#include "pwa/hash.hpp"
#include "pwa/types.hpp"

#include "json.hpp"

namespace pwa {

// ---------------------------------------------------------------------------
// Label matching between estimated and true parameters.

struct PermutationMatch {
  std::vector<int> greedy;      // per-index argmin ||Theta_hat_i - Theta*_j||
  std::vector<int> assignment;  // optimal assignment on squared costs
  Real greedy_cost = 0.0;       // sum of squared Frobenius errors, greedy
  Real assignment_cost = 0.0;
};

inline PermutationMatch match_permutation(
    const std::vector<AffineMap>& estimated,
    const std::vector<AffineMap>& truth) {
  if (estimated.size() != truth.size())
    throw std::invalid_argument("match_permutation: size mismatch");
  const int K = static_cast<int>(estimated.size());
  Eigen::MatrixXd cost(K, K);
  for (int i = 0; i < K; ++i)
    for (int j = 0; j < K; ++j)
      cost(i, j) = (estimated[static_cast<std::size_t>(i)].matrix -
                    truth[static_cast<std::size_t>(j)].matrix)
                       .squaredNorm();

  PermutationMatch match;
  match.greedy.resize(static_cast<std::size_t>(K));
  for (int i = 0; i < K; ++i) {
    int best = 0;
    for (int j = 1; j < K; ++j)
      if (cost(i, j) < cost(i, best)) best = j;
    match.greedy[static_cast<std::size_t>(i)] = best;
    match.greedy_cost += cost(i, best);
  }
  match.assignment = solve_assignment(cost);
  match.assignment_cost = assignment_cost(cost, match.assignment);
  return match;
}

// ---------------------------------------------------------------------------
// Per-(i, j) empirical covariance spectra, Sigma_ij = sum over t with
// estimated label i and true label j of xbar_t xbar_t^T.

struct PairSpectrum {
  int count = 0;
  Real lambda_min = 0.0;
  Real lambda_max = 0.0;
};

inline std::vector<std::vector<PairSpectrum>> covariance_spectrum(
    const std::vector<Vector>& xbars, const std::vector<int>& estimated_labels,
    const std::vector<int>& true_labels, int K) {
  if (xbars.size() != estimated_labels.size() ||
      xbars.size() != true_labels.size())
    throw std::invalid_argument("covariance_spectrum: size mismatch");
  const int p = xbars.empty() ? 0 : static_cast<int>(xbars.front().size());
  std::vector<std::vector<Matrix>> sums(
      static_cast<std::size_t>(K),
      std::vector<Matrix>(static_cast<std::size_t>(K), Matrix::Zero(p, p)));
  std::vector<std::vector<int>> counts(static_cast<std::size_t>(K),
                                       std::vector<int>(static_cast<std::size_t>(K), 0));
  for (std::size_t t = 0; t < xbars.size(); ++t) {
    const auto i = static_cast<std::size_t>(estimated_labels[t]);
    const auto j = static_cast<std::size_t>(true_labels[t]);
    sums[i][j].noalias() += xbars[t] * xbars[t].transpose();
    counts[i][j]++;
  }
  std::vector<std::vector<PairSpectrum>> out(
      static_cast<std::size_t>(K),
      std::vector<PairSpectrum>(static_cast<std::size_t>(K)));
  for (int i = 0; i < K; ++i)
    for (int j = 0; j < K; ++j) {
      auto& cell = out[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      cell.count = counts[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      if (cell.count == 0 || p == 0) continue;
      Eigen::SelfAdjointEigenSolver<Matrix> eig(
          sums[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);
      cell.lambda_min = eig.eigenvalues().minCoeff();
      cell.lambda_max = eig.eigenvalues().maxCoeff();
    }
  return out;
}

// ---------------------------------------------------------------------------
// Recovery curve: least-squares slope of log(error^2) against log(count).

inline Real recovery_curve_slope(const std::vector<std::pair<Real, Real>>&
                                     count_and_squared_error,
                                 Real min_count = 1.0) {
  std::vector<std::pair<Real, Real>> pts;
  for (const auto& [count, err2] : count_and_squared_error)
    if (count >= min_count && err2 > 1e-300)
      pts.emplace_back(std::log(count), std::log(err2));
  if (pts.size() < 4)
    throw std::invalid_argument(
        "recovery_curve_slope: need at least 4 usable checkpoints");
  Real sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& [x, y] : pts) {
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const Real n = static_cast<Real>(pts.size());
  const Real denom = n * sxx - sx * sx;
  if (std::abs(denom) < 1e-12)
    throw std::invalid_argument("recovery_curve_slope: degenerate abscissae");
  return (n * sxy - sx * sy) / denom;
}

// ---------------------------------------------------------------------------
// Run report.

struct EpochCheckpoint {
  int epoch = 0;
  int t_end = 0;  // number of samples seen when the oracle was called
  Real erm_objective = 0.0;
  Real realizability_gap = std::numeric_limits<Real>::quiet_NaN();
  std::vector<int> match_greedy;
  std::vector<int> match_assignment;
  std::vector<Real> matched_errors;  // ||Theta_hat_i - Theta*_{pi(i)}||_F^2
  Eigen::MatrixXi pair_counts;       // |I_ij(g_hat)| over all past data
  Matrix pair_lambda_min;
  Matrix pair_lambda_max;
  Eigen::MatrixXi epoch_mistake_counts;  // |I_ij(g_tilde)| within the epoch

  nlohmann::json to_json() const {
    auto mat_to_json = [](const auto& m) {
      nlohmann::json rows = nlohmann::json::array();
      for (int r = 0; r < m.rows(); ++r) {
        nlohmann::json row = nlohmann::json::array();
        for (int c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(row);
      }
      return rows;
    };
    return nlohmann::json{{"epoch", epoch},
                          {"t_end", t_end},
                          {"erm_objective", erm_objective},
                          {"realizability_gap", realizability_gap},
                          {"match_greedy", match_greedy},
                          {"match_assignment", match_assignment},
                          {"matched_errors", matched_errors},
                          {"pair_counts", mat_to_json(pair_counts)},
                          {"pair_lambda_min", mat_to_json(pair_lambda_min)},
                          {"pair_lambda_max", mat_to_json(pair_lambda_max)},
                          {"epoch_mistakes", mat_to_json(epoch_mistake_counts)}};
  }
};

struct RunReport {
  int schema_version = 1;
  std::uint64_t seed = 0;
  int T = 0;
  int K = 0;
  std::vector<Real> regret_increments;   // vs the noise-free comparator
  std::vector<Real> cumulative_regret;
  std::vector<std::uint8_t> mistake_flags;
  std::vector<int> epoch_of_t;
  std::vector<Real> prediction_errors;   // ||y_hat - y||^2 per step
  std::vector<EpochCheckpoint> checkpoints;
  Real clip_rate = 0.0;
  Real total_regret = 0.0;
  Real total_prediction_error = 0.0;
  int total_mistakes = 0;
  // one-step dynamics extras
  Real noise_floor = std::numeric_limits<Real>::quiet_NaN();
  Real covariate_smoothness = std::numeric_limits<Real>::quiet_NaN();
  nlohmann::json config_echo;

  bool has_ground_truth = false;

  // Pooled (count, matched squared error) checkpoints for recovery curves;
  // only pairs with count >= min_count contribute.
  std::vector<std::pair<Real, Real>> recovery_points(Real min_count) const {
    std::vector<std::pair<Real, Real>> pts;
    for (const auto& cp : checkpoints) {
      for (std::size_t i = 0; i < cp.matched_errors.size(); ++i) {
        const int j = cp.match_greedy[i];
        const int count = cp.pair_counts(static_cast<int>(i), j);
        if (count >= min_count)
          pts.emplace_back(static_cast<Real>(count), cp.matched_errors[i]);
      }
    }
    return pts;
  }

  std::uint64_t deterministic_hash() const {
    Fnv1a h;
    h.update(static_cast<std::int64_t>(seed));
    h.update(static_cast<std::int64_t>(T));
    h.update(static_cast<std::int64_t>(K));
    for (Real v : regret_increments) h.update(v);
    for (Real v : prediction_errors) h.update(v);
    for (auto v : mistake_flags) h.update(static_cast<std::int64_t>(v));
    for (const auto& cp : checkpoints) {
      h.update(cp.erm_objective);
      for (Real v : cp.matched_errors) h.update(v);
      for (int v : cp.match_greedy) h.update(static_cast<std::int64_t>(v));
    }
    return h.digest();
  }

  std::string deterministic_hash_hex() const {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(deterministic_hash()));
    return std::string(buf);
  }

  nlohmann::json to_json() const {
    nlohmann::json cps = nlohmann::json::array();
    for (const auto& cp : checkpoints) cps.push_back(cp.to_json());
    return nlohmann::json{{"schema_version", schema_version},
                          {"seed", seed},
                          {"T", T},
                          {"K", K},
                          {"total_regret", total_regret},
                          {"total_prediction_error", total_prediction_error},
                          {"total_mistakes", total_mistakes},
                          {"clip_rate", clip_rate},
                          {"noise_floor", noise_floor},
                          {"covariate_smoothness", covariate_smoothness},
                          {"has_ground_truth", has_ground_truth},
                          {"regret_increments", regret_increments},
                          {"mistake_flags", mistake_flags},
                          {"epoch_of_t", epoch_of_t},
                          {"prediction_errors", prediction_errors},
                          {"checkpoints", cps},
                          {"config", config_echo},
                          {"deterministic_hash", deterministic_hash_hex()}};
  }
};

}  // namespace pwa
