#pragma once

// Episodic H-step simulation and simulation-regret accounting. Each episode
// rolls the true system and the learned plug-in model from the same realized
// initial state; the learned rollouts share the true rollouts' noise and
// input draws, so the paired mean squared distance is a coupling upper bound
// and the optimal-assignment value on the same batches is the exact
// empirical squared Wasserstein-2 distance.

#include <Eigen/Core>

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "pwa/dynamics.hpp"
#include "pwa/erm.hpp"
#include "pwa/learner.hpp"
#include "pwa/metrics.hpp"
#include "pwa/wasserstein.hpp"

#include "json.hpp"

namespace pwa {

struct Trajectory {
  int episode = 0;
  std::vector<Vector> states;  // z_1 .. z_{H+1}
  std::vector<Vector> inputs;  // u_1 .. u_H
  std::vector<int> modes;      // i_1 .. i_H
};

// A rollout model is a mode selector on [z; u] plus per-mode regression maps
// [A | B | m] acting on the lifted concatenation.
struct RolloutModel {
  std::function<int(const Vector&)> mode_of;
  std::vector<AffineMap> maps;
  int d_z = 1;
  int d_u = 1;
};

inline RolloutModel rollout_model(const PwaDynamics& dyn, Real R = 10.0) {
  RolloutModel model;
  model.maps = dyn.as_maps(R);
  model.d_z = dyn.d_z;
  model.d_u = dyn.d_u;
  AffineClassifier g = dyn.classifier;
  model.mode_of = [g](const Vector& zu) { return classify(g, zu); };
  return model;
}

// Pre-drawn randomness for one episode so that true and simulated rollouts
// can share it (the coupling e_h = e_h', u_h = u_h').
struct EpisodeDraws {
  Vector z1;
  std::vector<std::vector<Vector>> inputs;  // [rollout][step]
  std::vector<std::vector<Vector>> noises;  // [rollout][step]
};

inline EpisodeDraws draw_episode(const PwaDynamics& dyn,
                                 const InputPolicy& policy,
                                 const NoiseChannel& init_channel, int H,
                                 int n_rollouts, SeededRng& rng) {
  EpisodeDraws draws;
  draws.z1 = init_channel.sample(rng);
  draws.inputs.resize(static_cast<std::size_t>(n_rollouts));
  draws.noises.resize(static_cast<std::size_t>(n_rollouts));
  for (int r = 0; r < n_rollouts; ++r) {
    for (int h = 0; h < H; ++h) {
      draws.inputs[static_cast<std::size_t>(r)].push_back(
          policy.draw_open_loop(rng));
      draws.noises[static_cast<std::size_t>(r)].push_back(
          draw_process_noise(dyn, rng));
    }
  }
  return draws;
}

inline Trajectory rollout(const RolloutModel& model, const Vector& z1,
                          const std::vector<Vector>& inputs,
                          const std::vector<Vector>& noises) {
  Trajectory traj;
  traj.states.push_back(z1);
  Vector z = z1;
  for (std::size_t h = 0; h < inputs.size(); ++h) {
    Vector zu(model.d_z + model.d_u);
    zu.head(model.d_z) = z;
    zu.tail(model.d_u) = inputs[h];
    const int mode = model.mode_of(zu);
    Vector z_next =
        model.maps[static_cast<std::size_t>(mode)].apply_lifted(lift(zu)) +
        noises[h];
    traj.inputs.push_back(inputs[h]);
    traj.modes.push_back(mode);
    traj.states.push_back(z_next);
    z = z_next;
  }
  return traj;
}

// n_rollouts independent H-step trajectories of one model under an open-loop
// policy, all from a fresh initial state per call.
inline std::vector<Trajectory> simulate_episode(const RolloutModel& model,
                                                const PwaDynamics& noise_source,
                                                const InputPolicy& policy,
                                                const NoiseChannel& init_channel,
                                                int H, int n_rollouts,
                                                SeededRng& rng) {
  EpisodeDraws draws =
      draw_episode(noise_source, policy, init_channel, H, n_rollouts, rng);
  std::vector<Trajectory> out;
  for (int r = 0; r < n_rollouts; ++r)
    out.push_back(rollout(model, draws.z1,
                          draws.inputs[static_cast<std::size_t>(r)],
                          draws.noises[static_cast<std::size_t>(r)]));
  return out;
}

// Concatenated (z_1, u_1, ..., z_H, u_H) feature rows for a rollout batch.
inline Eigen::MatrixXd trajectory_features(const std::vector<Trajectory>& batch) {
  if (batch.empty()) throw std::invalid_argument("trajectory_features: empty");
  const int H = static_cast<int>(batch.front().inputs.size());
  const int d_z = static_cast<int>(batch.front().states.front().size());
  const int d_u = static_cast<int>(batch.front().inputs.front().size());
  Eigen::MatrixXd feats(static_cast<int>(batch.size()), H * (d_z + d_u));
  for (std::size_t r = 0; r < batch.size(); ++r) {
    int col = 0;
    for (int h = 0; h < H; ++h) {
      feats.row(static_cast<int>(r)).segment(col, d_z) =
          batch[r].states[static_cast<std::size_t>(h)].transpose();
      col += d_z;
      feats.row(static_cast<int>(r)).segment(col, d_u) =
          batch[r].inputs[static_cast<std::size_t>(h)].transpose();
      col += d_u;
    }
  }
  return feats;
}

// ---------------------------------------------------------------------------
// Simulation-regret accounting.

struct SimEpisodeRecord {
  int episode = 0;
  Real w2_assignment = 0.0;
  Real w2_coupled = 0.0;
  Real cumulative_assignment = 0.0;
  Real cumulative_coupled = 0.0;
};

struct SimRegReport {
  int schema_version = 1;
  std::uint64_t seed = 0;
  int episodes = 0;
  int H = 0;
  int n_rollouts = 0;
  int eval_stride = 1;
  std::vector<SimEpisodeRecord> records;
  std::vector<Real> epoch_matched_error;  // max_i ||Theta~_i - Theta*_pi(i)||_F^2
  Real total_assignment = 0.0;
  Real total_coupled = 0.0;
  nlohmann::json config_echo;

  std::uint64_t deterministic_hash() const {
    Fnv1a h;
    h.update(static_cast<std::int64_t>(seed));
    for (const auto& rec : records) {
      h.update(static_cast<std::int64_t>(rec.episode));
      h.update(rec.w2_assignment);
      h.update(rec.w2_coupled);
    }
    return h.digest();
  }

  nlohmann::json to_json() const {
    nlohmann::json recs = nlohmann::json::array();
    for (const auto& rec : records)
      recs.push_back({{"episode", rec.episode},
                      {"w2_assign", rec.w2_assignment},
                      {"w2_coupled", rec.w2_coupled},
                      {"cumulative", rec.cumulative_assignment}});
    Fnv1a h;
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(deterministic_hash()));
    return nlohmann::json{{"schema_version", schema_version},
                          {"seed", seed},
                          {"episodes", episodes},
                          {"H", H},
                          {"n_rollouts", n_rollouts},
                          {"eval_stride", eval_stride},
                          {"total_w2_assign", total_assignment},
                          {"total_w2_coupled", total_coupled},
                          {"epoch_matched_error", epoch_matched_error},
                          {"records", recs},
                          {"config", config_echo},
                          {"deterministic_hash", std::string(buf)}};
  }
};

struct SimulationOptions {
  int H = 10;
  int n_rollouts = 128;
  int epoch_length = 100;  // episodes per oracle refit
  int eval_stride = 1;     // W2 is estimated on episodes divisible by this
  Real R = 10.0;
  HingeConfig hinge;
  ErmOptions erm;
  bool warm_start = true;
  InputPolicy policy;
  NoiseChannel init_channel;
};

// Algorithm loop for low simulation regret: refit at epoch boundaries,
// project the state blocks onto the Lyapunov cone, reorder, lazily update
// the hinge classifier, and between refits simulate each episode with the
// frozen plug-in model.
inline SimRegReport simulation_regret(const PwaDynamics& dyn, int episodes,
                                      const SimulationOptions& options,
                                      SeededRng rng) {
  dyn.validate();
  const int K = dyn.K;
  const int d = dyn.d_z + dyn.d_u;
  const int H = options.H;
  const int E = options.epoch_length;
  if (options.n_rollouts > kWasserstein2MaxSamples)
    throw std::invalid_argument("simulation_regret: n_rollouts must be <= 512");
  const bool project = dyn.lyapunov.size() > 0;
  const std::vector<AffineMap> true_maps = dyn.as_maps(options.R);
  const int A_threshold =
      options.hinge.cluster_threshold >= 0
          ? options.hinge.cluster_threshold
          : default_cluster_threshold(d, dyn.d_z, K, E * H);

  SimRegReport report;
  report.seed = rng.seed();
  report.episodes = episodes;
  report.H = H;
  report.n_rollouts = options.n_rollouts;
  report.eval_stride = options.eval_stride;

  SeededRng sys_rng = rng.substream(11);

  std::vector<Vector> xbars, ys;
  std::vector<int> warm_labels;

  // Frozen per-epoch learner state.
  bool have_fit = false;
  ErmFit fit;
  OgdWeights weights = OgdWeights::zeros(K, d + 1);
  RolloutModel learned;
  learned.d_z = dyn.d_z;
  learned.d_u = dyn.d_u;
  {
    AffineMap zero;
    zero.matrix = Matrix::Zero(dyn.d_z, d + 1);
    zero.frobenius_bound = options.R;
    learned.maps.assign(static_cast<std::size_t>(K), zero);
    OgdWeights w0 = weights;
    learned.mode_of = [w0](const Vector& zu) { return w0.predict(lift(zu)); };
  }

  const RolloutModel truth = rollout_model(dyn, options.R);

  for (int t = 0; t < episodes; ++t) {
    if (t > 0 && t % E == 0) {
      const int epoch = t / E;
      ErmOptions erm_opts = options.erm;
      if (options.warm_start && have_fit) {
        erm_opts.warm_labels.resize(xbars.size());
        for (std::size_t s = 0; s < xbars.size(); ++s)
          erm_opts.warm_labels[s] = fit.predict_label_lifted(xbars[s]);
      }
      SeededRng erm_rng = rng.substream(2000 + static_cast<std::uint64_t>(epoch));
      ErmFit raw = fit_heuristic(xbars, ys, K, options.R, erm_rng, erm_opts);
      if (project) {
        for (auto& map : raw.maps)
          map = project_to_lyapunov_cone(map, dyn.lyapunov);
      }
      std::vector<int> counts(static_cast<std::size_t>(K), 0);
      for (const auto& xb : xbars)
        counts[static_cast<std::size_t>(raw.predict_label_lifted(xb))]++;
      const std::vector<AffineMap>* prev = have_fit ? &fit.maps : nullptr;
      ErmFit reordered =
          reorder(raw, prev, counts, A_threshold, options.hinge.delta_sep);

      const std::size_t batch = static_cast<std::size_t>(E) * H;
      std::vector<Vector> batch_x(xbars.end() - static_cast<long>(batch),
                                  xbars.end());
      std::vector<int> batch_labels(batch);
      for (std::size_t s = 0; s < batch; ++s)
        batch_labels[s] = reordered.predict_label_lifted(batch_x[s]);
      weights = ogd_epoch(weights, batch_x, batch_labels, options.hinge.gamma,
                          options.hinge.eta);

      fit = std::move(reordered);
      have_fit = true;
      learned.maps = fit.maps;
      OgdWeights w_now = weights;
      learned.mode_of = [w_now](const Vector& zu) {
        return w_now.predict(lift(zu));
      };

      PermutationMatch match = match_permutation(fit.maps, true_maps);
      Real worst = 0.0;
      for (int i = 0; i < K; ++i)
        worst = std::max(
            worst, (fit.maps[static_cast<std::size_t>(i)].matrix -
                    true_maps[static_cast<std::size_t>(
                                  match.greedy[static_cast<std::size_t>(i)])]
                        .matrix)
                       .squaredNorm());
      report.epoch_matched_error.push_back(worst);
    }

    EpisodeDraws draws = draw_episode(dyn, options.policy, options.init_channel,
                                      H, options.n_rollouts, sys_rng);
    std::vector<Trajectory> true_batch, sim_batch;
    const bool evaluate = options.eval_stride <= 1 ||
                          t % options.eval_stride == 0;
    const int needed = evaluate ? options.n_rollouts : 1;
    for (int r = 0; r < needed; ++r) {
      true_batch.push_back(rollout(truth, draws.z1,
                                   draws.inputs[static_cast<std::size_t>(r)],
                                   draws.noises[static_cast<std::size_t>(r)]));
      if (evaluate)
        sim_batch.push_back(rollout(learned, draws.z1,
                                    draws.inputs[static_cast<std::size_t>(r)],
                                    draws.noises[static_cast<std::size_t>(r)]));
    }

    if (evaluate) {
      const Eigen::MatrixXd fa = trajectory_features(true_batch);
      const Eigen::MatrixXd fb = trajectory_features(sim_batch);
      SimEpisodeRecord rec;
      rec.episode = t;
      rec.w2_assignment = wasserstein2_empirical(fa, fb);
      rec.w2_coupled = wasserstein2_coupled(fa, fb);
      report.total_assignment += rec.w2_assignment;
      report.total_coupled += rec.w2_coupled;
      rec.cumulative_assignment = report.total_assignment;
      rec.cumulative_coupled = report.total_coupled;
      report.records.push_back(rec);
      if (std::isnan(rec.w2_assignment))
        throw std::runtime_error("simulation_regret: NaN distance");
    }

    // The first true rollout is the realized episode; its transitions join
    // the training data.
    const Trajectory& realized = true_batch.front();
    for (int h = 0; h < H; ++h) {
      Vector zu(d);
      zu.head(dyn.d_z) = realized.states[static_cast<std::size_t>(h)];
      zu.tail(dyn.d_u) = realized.inputs[static_cast<std::size_t>(h)];
      xbars.push_back(lift(zu));
      ys.push_back(realized.states[static_cast<std::size_t>(h) + 1]);
    }
  }
  return report;
}

// Sampling-noise floor: the assignment distance between two independent
// true-model batches under fresh draws.
inline Real simulation_self_distance(const PwaDynamics& dyn,
                                     const SimulationOptions& options,
                                     SeededRng& rng) {
  const RolloutModel truth = rollout_model(dyn, options.R);
  EpisodeDraws a = draw_episode(dyn, options.policy, options.init_channel,
                                options.H, options.n_rollouts, rng);
  EpisodeDraws b = draw_episode(dyn, options.policy, options.init_channel,
                                options.H, options.n_rollouts, rng);
  b.z1 = a.z1;  // same conditioning prefix
  std::vector<Trajectory> ba, bb;
  for (int r = 0; r < options.n_rollouts; ++r) {
    ba.push_back(rollout(truth, a.z1, a.inputs[static_cast<std::size_t>(r)],
                         a.noises[static_cast<std::size_t>(r)]));
    bb.push_back(rollout(truth, b.z1, b.inputs[static_cast<std::size_t>(r)],
                         b.noises[static_cast<std::size_t>(r)]));
  }
  return wasserstein2_empirical(trajectory_features(ba),
                                trajectory_features(bb));
}

}  // namespace pwa
