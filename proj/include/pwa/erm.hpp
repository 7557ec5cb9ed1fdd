#pragma once

// Batch fitting of a K-mode piecewise-affine model: a multi-restart
// alternating-minimization heuristic, and an exact enumeration oracle for
// tiny 1-D instances used to validate it.

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "pwa/hinge.hpp"
#include "pwa/random.hpp"
#include "pwa/types.hpp"

#include "json.hpp"

namespace pwa {

// ---------------------------------------------------------------------------
// Least squares for one mode.

// Minimizes sum ||Theta*xbar - y||^2 by normal equations, adding Tikhonov
// jitter 1e-10 when the Gram matrix is singular (this picks the minimum-norm
// solution in the rank-deficient case), then radially projects onto the
// Frobenius ball of radius R.
inline AffineMap least_squares_mode(const std::vector<Vector>& xbars,
                                    const std::vector<Vector>& ys, Real R) {
  if (xbars.empty())
    throw std::invalid_argument("least_squares_mode: need at least one point");
  const int p = static_cast<int>(xbars.front().size());
  const int m = static_cast<int>(ys.front().size());
  Matrix gram = Matrix::Zero(p, p);
  Matrix cross = Matrix::Zero(m, p);
  for (std::size_t t = 0; t < xbars.size(); ++t) {
    gram.noalias() += xbars[t] * xbars[t].transpose();
    cross.noalias() += ys[t] * xbars[t].transpose();
  }

  Eigen::LDLT<Matrix> ldlt(gram);
  bool singular = ldlt.info() != Eigen::Success || !ldlt.isPositive();
  if (!singular) {
    const Vector diag = ldlt.vectorD();
    if (diag.minCoeff() <= 1e-12 * std::max(Real(1), diag.maxCoeff()))
      singular = true;
  }
  if (singular)
    ldlt.compute(gram + 1e-10 * Matrix::Identity(p, p));

  AffineMap map;
  map.matrix = ldlt.solve(cross.transpose()).transpose();
  map.frobenius_bound = R;
  map.project_to_ball();
  return map;
}

// Exact solution of min sum ||Theta*xbar - y||^2 subject to ||Theta||_F <= R
// (Lagrangian bisection on the ridge parameter). Used by the enumeration
// oracle so that its objective is a true infimum.
inline AffineMap least_squares_mode_constrained(
    const std::vector<Vector>& xbars, const std::vector<Vector>& ys, Real R) {
  if (xbars.empty())
    throw std::invalid_argument(
        "least_squares_mode_constrained: need at least one point");
  const int p = static_cast<int>(xbars.front().size());
  const int m = static_cast<int>(ys.front().size());
  Matrix gram = Matrix::Zero(p, p);
  Matrix cross = Matrix::Zero(m, p);
  for (std::size_t t = 0; t < xbars.size(); ++t) {
    gram.noalias() += xbars[t] * xbars[t].transpose();
    cross.noalias() += ys[t] * xbars[t].transpose();
  }

  auto solve_with = [&](Real lambda) {
    Eigen::LDLT<Matrix> ldlt(gram + lambda * Matrix::Identity(p, p));
    Matrix theta = ldlt.solve(cross.transpose()).transpose();
    return theta;
  };

  Matrix theta = solve_with(1e-12);
  if (theta.norm() > R) {
    Real lo = 0.0, hi = std::max(cross.norm() / std::max(R, Real(1e-12)), Real(1));
    while (solve_with(hi).norm() > R) hi *= 2.0;
    for (int it = 0; it < 100; ++it) {
      const Real mid = 0.5 * (lo + hi);
      if (solve_with(mid).norm() > R)
        lo = mid;
      else
        hi = mid;
    }
    theta = solve_with(hi);
  }
  AffineMap map;
  map.matrix = theta;
  map.frobenius_bound = R;
  map.project_to_ball();  // guard against bisection slack
  return map;
}

// ---------------------------------------------------------------------------
// Fit result.

struct ErmFit {
  std::vector<AffineMap> maps;     // indexed by final label
  AffineClassifier classifier;     // base argmax classifier
  std::vector<int> label_map;      // relabeling applied on top of classifier
  Real objective = 0.0;
  int restarts_used = 0;
  int iterations = 0;
  Real eps_orac_estimate = std::numeric_limits<Real>::quiet_NaN();

  int num_modes() const { return static_cast<int>(maps.size()); }

  int predict_label(const Vector& x) const {
    return label_map[static_cast<std::size_t>(classify(classifier, x))];
  }
  int predict_label_lifted(const Vector& xbar) const {
    return predict_label(xbar.head(xbar.size() - 1));
  }

  Vector predict(const Vector& xbar) const {
    return maps[static_cast<std::size_t>(predict_label_lifted(xbar))]
        .apply_lifted(xbar);
  }

  nlohmann::json to_json() const {
    nlohmann::json maps_json = nlohmann::json::array();
    for (const auto& map : maps) {
      std::vector<Real> row_major;
      row_major.reserve(static_cast<std::size_t>(map.matrix.size()));
      for (int r = 0; r < map.matrix.rows(); ++r)
        for (int c = 0; c < map.matrix.cols(); ++c)
          row_major.push_back(map.matrix(r, c));
      maps_json.push_back({{"rows", map.matrix.rows()},
                           {"cols", map.matrix.cols()},
                           {"data", row_major},
                           {"frobenius_bound", map.frobenius_bound}});
    }
    std::vector<Real> dirs;
    for (int r = 0; r < classifier.directions.rows(); ++r)
      for (int c = 0; c < classifier.directions.cols(); ++c)
        dirs.push_back(classifier.directions(r, c));
    return nlohmann::json{
        {"maps", maps_json},
        {"classifier",
         {{"directions", dirs},
          {"offsets", std::vector<Real>(classifier.offsets.data(),
                                        classifier.offsets.data() +
                                            classifier.offsets.size())},
          {"offset_bound", classifier.offset_bound}}},
        {"label_map", label_map},
        {"objective", objective},
        {"restarts_used", restarts_used},
        {"iterations", iterations},
        {"eps_orac_estimate", eps_orac_estimate}};
  }
};

inline Real erm_objective(const std::vector<AffineMap>& maps,
                          const std::vector<int>& labels,
                          const std::vector<Vector>& xbars,
                          const std::vector<Vector>& ys) {
  Real total = 0.0;
  for (std::size_t t = 0; t < xbars.size(); ++t)
    total += (maps[static_cast<std::size_t>(labels[t])].apply_lifted(xbars[t]) -
              ys[t])
                 .squaredNorm();
  return total;
}

struct ErmOptions {
  int restarts = 16;
  int max_iter = 30;
  Real fit_gamma = 0.1;   // margin of the inner classifier fit
  int fit_steps = 200;    // full-batch subgradient steps per classifier fit
  std::vector<int> warm_labels;  // optional warm start for restart 0
};

// Per-(restart, iteration) objective trail, recorded for invariant checks.
struct ErmTraceEntry {
  int restart = 0;
  int iteration = 0;
  Real before_refit = 0.0;
  Real after_refit = 0.0;
  Real after_reassign = 0.0;
  Real consistent = 0.0;  // labels relabeled by the fitted classifier
};

namespace detail {

// k-means++ on the joint features [xbar; y], a handful of Lloyd rounds.
inline std::vector<int> kmeans_joint_labels(const std::vector<Vector>& xbars,
                                            const std::vector<Vector>& ys,
                                            int K, SeededRng& rng) {
  const std::size_t n = xbars.size();
  const int p = static_cast<int>(xbars.front().size());
  const int m = static_cast<int>(ys.front().size());
  std::vector<Vector> feats(n);
  for (std::size_t t = 0; t < n; ++t) {
    Vector f(p + m);
    f.head(p) = xbars[t];
    f.tail(m) = ys[t];
    feats[t] = f;
  }

  std::vector<Vector> centers;
  centers.push_back(feats[rng.uniform_index(n)]);
  std::vector<Real> dist2(n);
  while (static_cast<int>(centers.size()) < K) {
    Real total = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
      Real best = std::numeric_limits<Real>::infinity();
      for (const auto& c : centers)
        best = std::min(best, (feats[t] - c).squaredNorm());
      dist2[t] = best;
      total += best;
    }
    if (total <= 0.0) {
      centers.push_back(feats[rng.uniform_index(n)]);
      continue;
    }
    Real pick = rng.uniform() * total;
    std::size_t chosen = n - 1;
    for (std::size_t t = 0; t < n; ++t) {
      pick -= dist2[t];
      if (pick <= 0.0) {
        chosen = t;
        break;
      }
    }
    centers.push_back(feats[chosen]);
  }

  std::vector<int> labels(n, 0);
  for (int round = 0; round < 10; ++round) {
    bool changed = false;
    for (std::size_t t = 0; t < n; ++t) {
      int best = 0;
      Real best_d = (feats[t] - centers[0]).squaredNorm();
      for (int k = 1; k < K; ++k) {
        const Real d = (feats[t] - centers[static_cast<std::size_t>(k)])
                           .squaredNorm();
        if (d < best_d) {
          best_d = d;
          best = k;
        }
      }
      if (labels[t] != best) {
        labels[t] = best;
        changed = true;
      }
    }
    std::vector<Vector> sums(static_cast<std::size_t>(K),
                             Vector::Zero(p + m));
    std::vector<int> counts(static_cast<std::size_t>(K), 0);
    for (std::size_t t = 0; t < n; ++t) {
      sums[static_cast<std::size_t>(labels[t])] += feats[t];
      counts[static_cast<std::size_t>(labels[t])]++;
    }
    for (int k = 0; k < K; ++k)
      if (counts[static_cast<std::size_t>(k)] > 0)
        centers[static_cast<std::size_t>(k)] =
            sums[static_cast<std::size_t>(k)] /
            counts[static_cast<std::size_t>(k)];
    if (!changed) break;
  }
  return labels;
}

// Refit maps per label; empty clusters are re-seeded with the single
// worst-residual point so all K parameter slots stay alive. When previous
// maps are supplied, a cluster keeps its old map if the fresh projected
// least-squares fit would be worse on the cluster (keeps the objective
// monotone even when the ball projection binds).
inline std::vector<AffineMap> refit_maps(const std::vector<Vector>& xbars,
                                         const std::vector<Vector>& ys,
                                         std::vector<int>& labels, int K,
                                         Real R,
                                         const std::vector<AffineMap>* previous,
                                         bool allow_reseed = true) {
  const std::size_t n = xbars.size();
  std::vector<AffineMap> maps(static_cast<std::size_t>(K));

  for (int attempt = 0;; ++attempt) {
    std::vector<std::vector<Vector>> cx(static_cast<std::size_t>(K)),
        cy(static_cast<std::size_t>(K));
    for (std::size_t t = 0; t < n; ++t) {
      cx[static_cast<std::size_t>(labels[t])].push_back(xbars[t]);
      cy[static_cast<std::size_t>(labels[t])].push_back(ys[t]);
    }
    int empty = -1;
    for (int k = 0; k < K; ++k)
      if (cx[static_cast<std::size_t>(k)].empty()) {
        empty = k;
        break;
      }
    if (empty < 0) {
      for (int k = 0; k < K; ++k) {
        AffineMap fresh = least_squares_mode(cx[static_cast<std::size_t>(k)],
                                             cy[static_cast<std::size_t>(k)], R);
        if (previous != nullptr && !(*previous).empty() &&
            (*previous)[static_cast<std::size_t>(k)].matrix.size() > 0) {
          Real fresh_res = 0.0, old_res = 0.0;
          for (std::size_t i = 0; i < cx[static_cast<std::size_t>(k)].size();
               ++i) {
            fresh_res += (fresh.apply_lifted(cx[static_cast<std::size_t>(k)][i]) -
                          cy[static_cast<std::size_t>(k)][i])
                             .squaredNorm();
            old_res += ((*previous)[static_cast<std::size_t>(k)].apply_lifted(
                            cx[static_cast<std::size_t>(k)][i]) -
                        cy[static_cast<std::size_t>(k)][i])
                           .squaredNorm();
          }
          maps[static_cast<std::size_t>(k)] =
              fresh_res <= old_res ? fresh : (*previous)[static_cast<std::size_t>(k)];
        } else {
          maps[static_cast<std::size_t>(k)] = fresh;
        }
      }
      return maps;
    }
    if (!allow_reseed || attempt >= K) {
      // Fit what is fittable; empty clusters fall back to the previous map
      // when available, otherwise to the zero map.
      for (int k = 0; k < K; ++k) {
        if (cx[static_cast<std::size_t>(k)].empty()) {
          if (previous != nullptr && !previous->empty() &&
              (*previous)[static_cast<std::size_t>(k)].matrix.size() > 0) {
            maps[static_cast<std::size_t>(k)] =
                (*previous)[static_cast<std::size_t>(k)];
          } else {
            AffineMap zero;
            zero.matrix = Matrix::Zero(static_cast<int>(ys.front().size()),
                                       static_cast<int>(xbars.front().size()));
            zero.frobenius_bound = R;
            maps[static_cast<std::size_t>(k)] = zero;
          }
          continue;
        }
        AffineMap fresh = least_squares_mode(cx[static_cast<std::size_t>(k)],
                                             cy[static_cast<std::size_t>(k)], R);
        if (previous != nullptr && !previous->empty() &&
            (*previous)[static_cast<std::size_t>(k)].matrix.size() > 0) {
          Real fresh_res = 0.0, old_res = 0.0;
          for (std::size_t i = 0; i < cx[static_cast<std::size_t>(k)].size();
               ++i) {
            fresh_res += (fresh.apply_lifted(cx[static_cast<std::size_t>(k)][i]) -
                          cy[static_cast<std::size_t>(k)][i])
                             .squaredNorm();
            old_res += ((*previous)[static_cast<std::size_t>(k)].apply_lifted(
                            cx[static_cast<std::size_t>(k)][i]) -
                        cy[static_cast<std::size_t>(k)][i])
                           .squaredNorm();
          }
          maps[static_cast<std::size_t>(k)] =
              fresh_res <= old_res ? fresh
                                   : (*previous)[static_cast<std::size_t>(k)];
        } else {
          maps[static_cast<std::size_t>(k)] = fresh;
        }
      }
      return maps;
    }
    // Move the globally worst-residual point (under per-cluster LS fits of
    // the non-empty clusters) into the empty cluster.
    std::vector<AffineMap> partial(static_cast<std::size_t>(K));
    for (int k = 0; k < K; ++k)
      if (!cx[static_cast<std::size_t>(k)].empty())
        partial[static_cast<std::size_t>(k)] = least_squares_mode(
            cx[static_cast<std::size_t>(k)], cy[static_cast<std::size_t>(k)], R);
    std::size_t worst_t = 0;
    Real worst_res = -1.0;
    for (std::size_t t = 0; t < n; ++t) {
      const auto& map = partial[static_cast<std::size_t>(labels[t])];
      if (map.matrix.size() == 0) continue;
      const Real res = (map.apply_lifted(xbars[t]) - ys[t]).squaredNorm();
      if (res > worst_res) {
        worst_res = res;
        worst_t = t;
      }
    }
    labels[worst_t] = empty;
  }
}

// Exact coordinate-descent calibration of classifier offsets against target
// labels. The hinge fit supplies directions; the margin objective tolerates
// boundary-adjacent mismatches that the regression objective does not, so
// each offset is re-placed by a sorted sweep that minimizes the 0/1
// disagreement with the targets (O(n log n) per component).
inline void polish_classifier_offsets(AffineClassifier& g,
                                      const std::vector<Vector>& xbars,
                                      const std::vector<int>& targets,
                                      Real offset_bound, int rounds = 2) {
  const int K = g.num_modes();
  if (K < 2) return;
  const int d = g.covariate_dim();
  const std::size_t n = xbars.size();

  for (int round = 0; round < rounds; ++round) {
    for (int i = 0; i < K; ++i) {
      // For each point: the best competitor j* (excluding i) and the offset
      // threshold above which component i takes the argmax.
      std::vector<std::pair<Real, std::pair<char, char>>> sweep;
      sweep.reserve(n);
      for (std::size_t t = 0; t < n; ++t) {
        const auto x = xbars[t].head(d);
        Real best = -std::numeric_limits<Real>::infinity();
        int j_star = -1;
        for (int j = 0; j < K; ++j) {
          if (j == i) continue;
          const Real s = g.directions.row(j).dot(x) + g.offsets[j];
          if (s > best) {
            best = s;
            j_star = j;
          }
        }
        const Real threshold = best - g.directions.row(i).dot(x);
        const char win_loss = targets[t] != i ? 1 : 0;
        const char lose_loss = targets[t] != j_star ? 1 : 0;
        sweep.emplace_back(threshold, std::make_pair(win_loss, lose_loss));
      }
      std::sort(sweep.begin(), sweep.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });

      // mism(k) = loss when exactly the k smallest thresholds are won by i.
      Real lose_total = 0;
      for (const auto& entry : sweep) lose_total += entry.second.second;
      Real best_obj = lose_total;  // k = 0
      std::size_t best_k = 0;
      Real acc = lose_total;
      for (std::size_t k = 1; k <= n; ++k) {
        acc += sweep[k - 1].second.first - sweep[k - 1].second.second;
        const bool boundary_ok = k == n || sweep[k].first > sweep[k - 1].first;
        if (boundary_ok && acc < best_obj - 1e-12) {
          best_obj = acc;
          best_k = k;
        }
      }
      Real b;
      if (best_k == 0)
        b = sweep.front().first - 1.0;
      else if (best_k == n)
        b = sweep.back().first + 1.0;
      else
        b = 0.5 * (sweep[best_k - 1].first + sweep[best_k].first);
      g.offsets[i] = std::clamp(b, -offset_bound, offset_bound);
    }
  }
  g.offset_bound = offset_bound;
}

inline std::vector<int> reassign_labels(const std::vector<AffineMap>& maps,
                                        const std::vector<Vector>& xbars,
                                        const std::vector<Vector>& ys) {
  std::vector<int> labels(xbars.size(), 0);
  for (std::size_t t = 0; t < xbars.size(); ++t) {
    int best = 0;
    Real best_res =
        (maps[0].apply_lifted(xbars[t]) - ys[t]).squaredNorm();
    for (std::size_t k = 1; k < maps.size(); ++k) {
      const Real res = (maps[k].apply_lifted(xbars[t]) - ys[t]).squaredNorm();
      if (res < best_res) {
        best_res = res;
        best = static_cast<int>(k);
      }
    }
    labels[t] = best;
  }
  return labels;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Heuristic ERM: alternating minimization with restarts.
//
// Each restart: initialize labels (warm start, joint k-means, or random),
// then iterate { refit per-label least squares -> reassign points by
// residual -> fit an argmax classifier to the labels by batch hinge descent
// -> relabel by the classifier } until the labels are stable. The best
// classifier-consistent configuration over all restarts and iterations is
// returned (ties break to the lowest restart index).
inline ErmFit fit_heuristic(const std::vector<Vector>& xbars,
                            const std::vector<Vector>& ys, int K, Real R,
                            SeededRng& rng, const ErmOptions& opts = {},
                            std::vector<ErmTraceEntry>* trace = nullptr) {
  const std::size_t n = xbars.size();
  if (static_cast<std::size_t>(K) > n)
    throw std::invalid_argument("fit_heuristic: need at least K data points");
  const int lifted = static_cast<int>(xbars.front().size());
  const Real tol = 1e-7;

  ErmFit best;
  Real best_obj = std::numeric_limits<Real>::infinity();
  int best_iterations = 0;

  // Single mode: plain projected least squares, no assignment loop.
  if (K == 1) {
    best.maps = {least_squares_mode(xbars, ys, R)};
    best.classifier.directions = Matrix::Zero(1, lifted - 1);
    best.classifier.offsets = Vector::Zero(1);
    best.classifier.offset_bound = 1.0;
    best.label_map = {0};
    best.objective = erm_objective(best.maps, std::vector<int>(n, 0), xbars, ys);
    best.restarts_used = 1;
    best.iterations = 1;
    return best;
  }

  for (int restart = 0; restart < std::max(1, opts.restarts); ++restart) {
    SeededRng restart_rng = rng.substream(static_cast<std::uint64_t>(restart));
    std::vector<int> labels;
    const bool have_warm = !opts.warm_labels.empty() &&
                           opts.warm_labels.size() == n;
    if (restart == 0 && have_warm) {
      labels = opts.warm_labels;
    } else if (restart == (have_warm ? 1 : 0)) {
      labels = detail::kmeans_joint_labels(xbars, ys, K, restart_rng);
    } else {
      labels.resize(n);
      for (auto& l : labels)
        l = static_cast<int>(restart_rng.uniform_index(
            static_cast<std::uint64_t>(K)));
    }

    std::vector<AffineMap> maps;
    OgdWeights fit_weights;
    for (int iter = 1; iter <= opts.max_iter; ++iter) {
      ErmTraceEntry entry;
      entry.restart = restart;
      entry.iteration = iter;
      entry.before_refit =
          maps.empty() ? std::numeric_limits<Real>::infinity()
                       : erm_objective(maps, labels, xbars, ys);

      maps = detail::refit_maps(xbars, ys, labels, K, R,
                                maps.empty() ? nullptr : &maps);
      entry.after_refit = erm_objective(maps, labels, xbars, ys);
      if (entry.after_refit > entry.before_refit + tol * (1.0 + entry.before_refit))
        throw std::logic_error("fit_heuristic: refit increased the objective");

      std::vector<int> reassigned = detail::reassign_labels(maps, xbars, ys);
      entry.after_reassign = erm_objective(maps, reassigned, xbars, ys);
      if (entry.after_reassign > entry.after_refit + tol * (1.0 + entry.after_refit))
        throw std::logic_error("fit_heuristic: reassign increased the objective");

      fit_weights = fit_weights_batch_hinge(xbars, reassigned, K,
                                            opts.fit_gamma, opts.fit_steps,
                                            fit_weights);
      AffineClassifier candidate_g = weights_to_classifier(fit_weights, 1.0);
      Real data_scale = 1.0;
      for (const auto& xb : xbars) data_scale = std::max(data_scale, xb.norm());
      detail::polish_classifier_offsets(candidate_g, xbars, reassigned,
                                        data_scale + 1.0);
      std::vector<int> relabeled(n);
      for (std::size_t t = 0; t < n; ++t)
        relabeled[t] =
            classify(candidate_g, xbars[t].head(lifted - 1));

      // Classifier-consistent candidate: maps refit on the relabeled data.
      std::vector<int> cand_labels = relabeled;
      std::vector<AffineMap> cand_maps = detail::refit_maps(
          xbars, ys, cand_labels, K, R, &maps, /*allow_reseed=*/false);
      entry.consistent = erm_objective(cand_maps, cand_labels, xbars, ys);
      if (trace != nullptr) trace->push_back(entry);

      if (entry.consistent < best_obj - 1e-15) {
        best_obj = entry.consistent;
        best.maps = cand_maps;
        best.classifier = candidate_g;
        best.label_map.assign(static_cast<std::size_t>(K), 0);
        for (int k = 0; k < K; ++k)
          best.label_map[static_cast<std::size_t>(k)] = k;
        best_iterations = iter;
      }

      if (relabeled == labels) break;
      labels = std::move(relabeled);
    }
  }

  best.objective = best_obj;
  best.iterations = best_iterations;
  best.restarts_used = std::max(1, opts.restarts);
  return best;
}

// ---------------------------------------------------------------------------
// Exact oracle for tiny 1-D instances: enumerates all partitions of the
// sorted points into at most K contiguous intervals (points with equal x can
// never be split), solves the R-constrained least squares on each interval,
// and returns the global optimum with an interval-threshold classifier.
inline ErmFit brute_force_erm(const std::vector<Vector>& xbars,
                              const std::vector<Vector>& ys, int K, Real R) {
  const std::size_t n = xbars.size();
  if (n == 0) throw std::invalid_argument("brute_force_erm: empty data");
  if (xbars.front().size() != 2)
    throw std::invalid_argument("brute_force_erm: only d = 1 supported");
  if (n > 24) throw std::invalid_argument("brute_force_erm: n must be <= 24");
  if (K > 3 || K < 1)
    throw std::invalid_argument("brute_force_erm: K must be in {1, 2, 3}");

  std::vector<std::size_t> order(n);
  for (std::size_t t = 0; t < n; ++t) order[t] = t;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return xbars[a][0] < xbars[b][0];
  });

  // Group equal x values; splits are only allowed between distinct groups.
  std::vector<std::pair<std::size_t, std::size_t>> groups;  // [begin, end)
  std::size_t begin = 0;
  for (std::size_t i = 1; i <= n; ++i) {
    if (i == n || xbars[order[i]][0] != xbars[order[begin]][0]) {
      groups.emplace_back(begin, i);
      begin = i;
    }
  }
  const int G = static_cast<int>(groups.size());

  auto segment_fit = [&](int g0, int g1) {  // groups [g0, g1)
    std::vector<Vector> sx, sy;
    for (int g = g0; g < g1; ++g)
      for (std::size_t i = groups[static_cast<std::size_t>(g)].first;
           i < groups[static_cast<std::size_t>(g)].second; ++i) {
        sx.push_back(xbars[order[i]]);
        sy.push_back(ys[order[i]]);
      }
    AffineMap map = least_squares_mode_constrained(sx, sy, R);
    Real res = 0.0;
    for (std::size_t i = 0; i < sx.size(); ++i)
      res += (map.apply_lifted(sx[i]) - sy[i]).squaredNorm();
    return std::make_pair(map, res);
  };

  Real best_obj = std::numeric_limits<Real>::infinity();
  std::vector<int> best_cuts;
  std::vector<AffineMap> best_maps;

  std::vector<int> cuts;  // cut after group index c (0-based): split between
                          // group c and c+1
  auto evaluate = [&]() {
    Real obj = 0.0;
    std::vector<AffineMap> maps;
    int g0 = 0;
    for (std::size_t c = 0; c <= cuts.size(); ++c) {
      const int g1 = c < cuts.size() ? cuts[c] + 1 : G;
      auto [map, res] = segment_fit(g0, g1);
      maps.push_back(map);
      obj += res;
      g0 = g1;
    }
    if (obj < best_obj - 1e-15) {
      best_obj = obj;
      best_cuts = cuts;
      best_maps = maps;
    }
  };

  // Enumerate by number of cuts (0 .. K-1), lexicographic positions.
  evaluate();
  if (K >= 2) {
    for (int c1 = 0; c1 + 1 < G; ++c1) {
      cuts = {c1};
      evaluate();
      if (K >= 3) {
        for (int c2 = c1 + 1; c2 + 1 < G; ++c2) {
          cuts = {c1, c2};
          evaluate();
        }
      }
    }
  }

  // Build the interval classifier: component slopes 0, h, 2h (h = 1/(K-1))
  // with offsets chosen so the upper envelope switches at the midpoints
  // between adjacent groups. Unused components duplicate component 0 and
  // lose every tie.
  ErmFit fit;
  const int segments = static_cast<int>(best_maps.size());
  fit.maps = best_maps;
  while (static_cast<int>(fit.maps.size()) < K) {
    AffineMap zero;
    zero.matrix = Matrix::Zero(static_cast<int>(ys.front().size()), 2);
    zero.frobenius_bound = R;
    fit.maps.push_back(zero);
  }

  fit.classifier.directions = Matrix::Zero(K, 1);
  fit.classifier.offsets = Vector::Zero(K);
  if (K >= 2) {
    const Real h = 1.0 / static_cast<Real>(K - 1);
    Real offset = 0.0;
    for (int s = 0; s < segments; ++s) {
      fit.classifier.directions(s, 0) = h * static_cast<Real>(s);
      fit.classifier.offsets[s] = offset;
      if (s < segments - 1) {
        const int cut_group = best_cuts[static_cast<std::size_t>(s)];
        const Real left =
            xbars[order[groups[static_cast<std::size_t>(cut_group)].second - 1]]
                 [0];
        const Real right =
            xbars[order[groups[static_cast<std::size_t>(cut_group) + 1].first]]
                 [0];
        const Real threshold = 0.5 * (left + right);
        offset -= threshold * h;
      }
    }
    for (int s = segments; s < K; ++s) {
      fit.classifier.directions.row(s) = fit.classifier.directions.row(0);
      fit.classifier.offsets[s] = fit.classifier.offsets[0];
    }
  }
  Real max_offset = fit.classifier.offsets.cwiseAbs().maxCoeff();
  fit.classifier.offset_bound = std::max(Real(1), max_offset);
  fit.label_map.assign(static_cast<std::size_t>(K), 0);
  for (int k = 0; k < K; ++k) fit.label_map[static_cast<std::size_t>(k)] = k;
  fit.objective = best_obj;
  fit.restarts_used = 1;
  fit.iterations = 1;
  return fit;
}

}  // namespace pwa
