#pragma once

// The epoch-based online learner: at every epoch boundary the ERM oracle is
// refit on all past data, labels are merged/permuted for cross-epoch
// consistency, the hinge classifier takes one lazy OGD pass over the epoch
// that just finished, and predictions run through the next epoch with the
// frozen fit.

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

#include "pwa/erm.hpp"
#include "pwa/hinge.hpp"
#include "pwa/metrics.hpp"
#include "pwa/random.hpp"
#include "pwa/types.hpp"

namespace pwa {

struct HingeConfig {
  Real gamma = 0.1;        // hinge margin
  Real eta = 0.01;         // OGD step size
  int epoch_length = 0;    // E
  int cluster_threshold = -1;  // A; defaulted from the dimensions when < 0
  Real delta_sep = 1.0;    // merge gap

  void validate(int T) const {
    if (gamma <= 0.0) throw std::invalid_argument("HingeConfig: gamma > 0");
    if (eta < 0.0) throw std::invalid_argument("HingeConfig: eta >= 0");
    if (epoch_length <= 0 || epoch_length > T)
      throw std::invalid_argument("HingeConfig: need 0 < E <= T");
    if (delta_sep <= 0.0)
      throw std::invalid_argument("HingeConfig: delta_sep > 0");
  }
};

// Horizon-indexed parameter schedule: E = T^(17/18), gamma = T^(-1/36),
// eta = T^(-19/36). Computed through exp2/log2 so powers of two map to
// exact powers of two.
inline HingeConfig schedule(std::uint64_t T) {
  const double l = std::log2(static_cast<double>(T));
  HingeConfig cfg;
  cfg.epoch_length = static_cast<int>(std::llround(std::exp2(l * 17.0 / 18.0)));
  cfg.gamma = std::exp2(-l / 36.0);
  cfg.eta = std::exp2(-l * 19.0 / 36.0);
  return cfg;
}

inline int default_cluster_threshold(int d, int m, int K, int E) {
  return std::max(10 * (d + 1) * m, E / (4 * K));
}

// ---------------------------------------------------------------------------
// Reorder (label merge + cross-epoch permutation).
//
// Phase 1: merge pairs of clusters that are both large (count >= A) and
// whose parameters are closer than delta_sep; the lower index survives.
// Phase 2: in decreasing-count order, every cluster with count > A claims
// the nearest previous-epoch parameter slot without replacement; the partial
// claim map is extended to a total permutation so K parameter slots remain.

struct ReorderInfo {
  std::vector<int> merge_map;  // label -> representative after merging
  std::vector<int> relabel;    // final old-label -> new-label map
};

inline ErmFit reorder(const ErmFit& fit,
                      const std::vector<AffineMap>* previous_maps,
                      const std::vector<int>& counts, int A, Real delta_sep,
                      ReorderInfo* info = nullptr) {
  const int K = fit.num_modes();
  if (static_cast<int>(counts.size()) != K)
    throw std::invalid_argument("reorder: counts size mismatch");

  std::vector<long long> live(counts.begin(), counts.end());
  std::vector<int> merge(static_cast<std::size_t>(K));
  for (int i = 0; i < K; ++i) merge[static_cast<std::size_t>(i)] = i;

  for (int i = 0; i < K; ++i) {
    if (merge[static_cast<std::size_t>(i)] != i) continue;
    for (int j = i + 1; j < K; ++j) {
      if (merge[static_cast<std::size_t>(j)] != j) continue;
      if (std::min(live[static_cast<std::size_t>(i)],
                   live[static_cast<std::size_t>(j)]) < A)
        continue;
      const Real dist = (fit.maps[static_cast<std::size_t>(i)].matrix -
                         fit.maps[static_cast<std::size_t>(j)].matrix)
                            .norm();
      if (dist < delta_sep) {
        merge[static_cast<std::size_t>(j)] = i;
        live[static_cast<std::size_t>(i)] += live[static_cast<std::size_t>(j)];
        live[static_cast<std::size_t>(j)] = 0;
      }
    }
  }

  // Phase 2: permutation of labels toward the previous epoch's slots.
  std::vector<int> perm(static_cast<std::size_t>(K), -1);
  if (previous_maps != nullptr && !previous_maps->empty()) {
    std::vector<int> order(static_cast<std::size_t>(K));
    for (int i = 0; i < K; ++i) order[static_cast<std::size_t>(i)] = i;
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return live[static_cast<std::size_t>(a)] > live[static_cast<std::size_t>(b)];
    });
    std::vector<bool> taken(static_cast<std::size_t>(K), false);
    for (int idx : order) {
      if (live[static_cast<std::size_t>(idx)] <= A) continue;
      int best = -1;
      Real best_dist = std::numeric_limits<Real>::infinity();
      for (int j = 0; j < K; ++j) {
        if (taken[static_cast<std::size_t>(j)]) continue;
        const Real dist =
            (fit.maps[static_cast<std::size_t>(idx)].matrix -
             (*previous_maps)[static_cast<std::size_t>(j)].matrix)
                .norm();
        if (dist < best_dist) {
          best_dist = dist;
          best = j;
        }
      }
      perm[static_cast<std::size_t>(idx)] = best;
      taken[static_cast<std::size_t>(best)] = true;
    }
    // Extend the claim map to a bijection.
    int next_free = 0;
    for (int i = 0; i < K; ++i) {
      if (perm[static_cast<std::size_t>(i)] >= 0) continue;
      while (taken[static_cast<std::size_t>(next_free)]) ++next_free;
      perm[static_cast<std::size_t>(i)] = next_free;
      taken[static_cast<std::size_t>(next_free)] = true;
    }
  } else {
    for (int i = 0; i < K; ++i) perm[static_cast<std::size_t>(i)] = i;
  }

  std::vector<int> relabel(static_cast<std::size_t>(K));
  for (int i = 0; i < K; ++i)
    relabel[static_cast<std::size_t>(i)] =
        perm[static_cast<std::size_t>(merge[static_cast<std::size_t>(i)])];

  ErmFit out = fit;
  for (int i = 0; i < K; ++i)
    out.maps[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])] =
        fit.maps[static_cast<std::size_t>(i)];
  for (std::size_t c = 0; c < out.label_map.size(); ++c)
    out.label_map[c] = relabel[static_cast<std::size_t>(fit.label_map[c])];

  if (info != nullptr) {
    info->merge_map = merge;
    info->relabel = relabel;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Online run.

struct LearnerOptions {
  HingeConfig hinge;
  ErmOptions erm;
  bool warm_start = true;  // seed restart 0 with the previous epoch's labels
};

// Streams observations one step at a time; hidden fields of Observation are
// consumed only by the report. If `true_maps` is given, regret against the
// noise-free comparator and mode mistakes are recorded.
inline RunReport run_online_learner(
    const std::function<Observation()>& stream, int T, const Dimensions& dims,
    Real R, const LearnerOptions& options,
    const std::vector<AffineMap>* true_maps, SeededRng rng) {
  dims.validate();
  HingeConfig cfg = options.hinge;
  cfg.validate(T);
  const int K = dims.K;
  const int E = cfg.epoch_length;
  const int A = cfg.cluster_threshold >= 0
                    ? cfg.cluster_threshold
                    : default_cluster_threshold(dims.d, dims.m, K, E);

  RunReport report;
  report.T = T;
  report.K = K;
  report.seed = rng.seed();
  report.has_ground_truth = true_maps != nullptr;

  std::vector<Vector> xbars, ys;
  std::vector<int> hidden;
  xbars.reserve(static_cast<std::size_t>(T));
  ys.reserve(static_cast<std::size_t>(T));
  Real noise_sq_sum = 0.0;  // sum ||e_t + delta_t||^2, for the gap proxy
  int clip_count = 0;

  // Current epoch state.
  int epoch = 0;
  ErmFit fit;  // empty until the first boundary
  OgdWeights weights = OgdWeights::zeros(K, dims.d + 1);
  std::vector<int> pi_greedy(static_cast<std::size_t>(K), 0);
  bool have_fit = false;
  Eigen::MatrixXi epoch_mistakes = Eigen::MatrixXi::Zero(K, K);

  Real cumulative = 0.0;

  auto close_epoch_checkpoint = [&]() {
    if (!report.checkpoints.empty())
      report.checkpoints.back().epoch_mistake_counts = epoch_mistakes;
    epoch_mistakes.setZero();
  };

  for (int t = 0; t < T; ++t) {
    if (t > 0 && t % E == 0) {
      close_epoch_checkpoint();
      epoch = t / E;

      // ERM on all past data.
      ErmOptions erm_opts = options.erm;
      if (options.warm_start && have_fit) {
        erm_opts.warm_labels.resize(static_cast<std::size_t>(t));
        for (int s = 0; s < t; ++s)
          erm_opts.warm_labels[static_cast<std::size_t>(s)] =
              fit.predict_label_lifted(xbars[static_cast<std::size_t>(s)]);
      }
      SeededRng erm_rng = rng.substream(1000 + static_cast<std::uint64_t>(epoch));
      ErmFit raw = fit_heuristic(xbars, ys, K, R, erm_rng, erm_opts);

      // Reorder against the previous epoch's (already reordered) maps.
      std::vector<int> counts(static_cast<std::size_t>(K), 0);
      for (int s = 0; s < t; ++s)
        counts[static_cast<std::size_t>(raw.predict_label_lifted(
            xbars[static_cast<std::size_t>(s)]))]++;
      const std::vector<AffineMap>* prev = have_fit ? &fit.maps : nullptr;
      ErmFit reordered = reorder(raw, prev, counts, A, cfg.delta_sep);

      // Lazy OGD over the epoch that just finished, labels from the fresh
      // (reordered) classifier.
      std::vector<Vector> batch_x(xbars.begin() + (t - E), xbars.begin() + t);
      std::vector<int> batch_labels(static_cast<std::size_t>(E));
      for (int s = 0; s < E; ++s)
        batch_labels[static_cast<std::size_t>(s)] =
            reordered.predict_label_lifted(batch_x[static_cast<std::size_t>(s)]);
      weights = ogd_epoch(weights, batch_x, batch_labels, cfg.gamma, cfg.eta);

      fit = std::move(reordered);
      have_fit = true;

      // Checkpoint diagnostics.
      EpochCheckpoint cp;
      cp.epoch = epoch;
      cp.t_end = t;
      cp.erm_objective = fit.objective;
      if (report.has_ground_truth) cp.realizability_gap = fit.objective - noise_sq_sum;

      std::vector<int> est_labels(static_cast<std::size_t>(t));
      for (int s = 0; s < t; ++s)
        est_labels[static_cast<std::size_t>(s)] =
            fit.predict_label_lifted(xbars[static_cast<std::size_t>(s)]);
      cp.pair_counts = Eigen::MatrixXi::Zero(K, K);
      cp.pair_lambda_min = Matrix::Zero(K, K);
      cp.pair_lambda_max = Matrix::Zero(K, K);
      if (report.has_ground_truth) {
        auto spectra = covariance_spectrum(
            std::vector<Vector>(xbars.begin(), xbars.begin() + t), est_labels,
            std::vector<int>(hidden.begin(), hidden.begin() + t), K);
        for (int i = 0; i < K; ++i)
          for (int j = 0; j < K; ++j) {
            cp.pair_counts(i, j) =
                spectra[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]
                    .count;
            cp.pair_lambda_min(i, j) =
                spectra[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]
                    .lambda_min;
            cp.pair_lambda_max(i, j) =
                spectra[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]
                    .lambda_max;
          }
        PermutationMatch match = match_permutation(fit.maps, *true_maps);
        cp.match_greedy = match.greedy;
        cp.match_assignment = match.assignment;
        pi_greedy = match.greedy;
        cp.matched_errors.resize(static_cast<std::size_t>(K));
        for (int i = 0; i < K; ++i)
          cp.matched_errors[static_cast<std::size_t>(i)] =
              (fit.maps[static_cast<std::size_t>(i)].matrix -
               (*true_maps)[static_cast<std::size_t>(match.greedy
                                                         [static_cast<std::size_t>(
                                                             i)])]
                   .matrix)
                  .squaredNorm();
      }
      cp.epoch_mistake_counts = Eigen::MatrixXi::Zero(K, K);
      report.checkpoints.push_back(std::move(cp));
    }

    Observation obs = stream();
    if (obs.clipped) ++clip_count;

    // Predict with the frozen epoch state.
    const int predicted_label = weights.predict(obs.x_lift);
    Vector y_hat = Vector::Zero(dims.m);
    if (have_fit)
      y_hat = fit.maps[static_cast<std::size_t>(predicted_label)].apply_lifted(
          obs.x_lift);

    const Real pred_err = (y_hat - obs.y).squaredNorm();
    report.prediction_errors.push_back(pred_err);
    report.total_prediction_error += pred_err;
    report.epoch_of_t.push_back(epoch);

    if (report.has_ground_truth) {
      const Vector target =
          (*true_maps)[static_cast<std::size_t>(obs.hidden_mode)].apply_lifted(
              obs.x_lift);
      const Real increment = (y_hat - target).squaredNorm();
      cumulative += increment;
      report.regret_increments.push_back(increment);
      report.cumulative_regret.push_back(cumulative);
      const int matched =
          pi_greedy[static_cast<std::size_t>(predicted_label)];
      const bool mistake = matched != obs.hidden_mode;
      report.mistake_flags.push_back(mistake ? 1 : 0);
      if (mistake) report.total_mistakes += 1;
      epoch_mistakes(predicted_label, obs.hidden_mode) += 1;
    }

    if (std::isnan(pred_err))
      throw std::runtime_error("run_online_learner: NaN prediction error");

    xbars.push_back(obs.x_lift);
    ys.push_back(obs.y);
    hidden.push_back(obs.hidden_mode);
    noise_sq_sum += (obs.noise + obs.corruption).squaredNorm();
  }
  close_epoch_checkpoint();

  report.total_regret = cumulative;
  report.clip_rate = T > 0 ? static_cast<Real>(clip_count) / T : 0.0;
  return report;
}

}  // namespace pwa
