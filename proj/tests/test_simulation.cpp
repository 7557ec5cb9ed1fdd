#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "pwa/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

using namespace pwa;

namespace {

PwaDynamics stable_two_mode(double b_noise = 0.15) {
  PwaDynamics dyn;
  dyn.d_z = 1;
  dyn.d_u = 1;
  dyn.K = 2;
  PwaDynamics::Mode m1, m2;
  m1.A = Matrix::Constant(1, 1, 0.8);
  m1.B = Matrix::Constant(1, 1, 1.0);
  m1.m = Vector::Constant(1, 0.3);
  m2.A = Matrix::Constant(1, 1, -0.5);
  m2.B = Matrix::Constant(1, 1, 1.0);
  m2.m = Vector::Constant(1, -0.4);
  dyn.modes = {m1, m2};
  dyn.classifier.directions = Matrix(2, 2);
  dyn.classifier.directions << -1, 0, 1, 0;
  dyn.classifier.offsets = Vector::Zero(2);
  dyn.classifier.offset_bound = 1.0;
  dyn.process_noise = NoiseChannel::uniform_ball(1, b_noise);
  dyn.b_noise = b_noise;
  dyn.lyapunov = Matrix::Identity(1, 1);
  dyn.validate();
  return dyn;
}

SimulationOptions default_options() {
  SimulationOptions options;
  options.H = 6;
  options.n_rollouts = 32;
  options.epoch_length = 20;
  options.R = 5.0;
  options.hinge.epoch_length = 1;  // unused placeholder, validated elsewhere
  options.hinge.gamma = 0.05;
  options.hinge.eta = 0.02;
  options.hinge.delta_sep = 1.0;
  options.erm.restarts = 2;
  options.policy.nominal = Vector::Zero(1);
  options.policy.exploration = NoiseChannel::uniform_ball(1, 0.5);
  options.init_channel = NoiseChannel::uniform_ball(1, 0.3);
  return options;
}

}  // namespace

TEST_CASE("noiseless identical models simulate identically") {
  PwaDynamics dyn = stable_two_mode(0.0);
  dyn.b_noise = 0.0;
  RolloutModel truth = rollout_model(dyn, 5.0);
  SimulationOptions options = default_options();
  SeededRng rng(1);
  EpisodeDraws draws = draw_episode(dyn, options.policy,
                                    options.init_channel, 8, 16, rng);
  for (int r = 0; r < 16; ++r) {
    Trajectory a = rollout(truth, draws.z1,
                           draws.inputs[static_cast<std::size_t>(r)],
                           draws.noises[static_cast<std::size_t>(r)]);
    Trajectory b = rollout(truth, draws.z1,
                           draws.inputs[static_cast<std::size_t>(r)],
                           draws.noises[static_cast<std::size_t>(r)]);
    for (std::size_t h = 0; h < a.states.size(); ++h)
      CHECK((a.states[h] - b.states[h]).norm() == 0.0);
  }
}

TEST_CASE("null dynamics follow the offset-driven recursion") {
  PwaDynamics dyn;
  dyn.d_z = 1;
  dyn.d_u = 1;
  dyn.K = 1;
  PwaDynamics::Mode mode;
  mode.A = Matrix::Zero(1, 1);
  mode.B = Matrix::Zero(1, 1);
  mode.m = Vector::Constant(1, 0.7);
  dyn.modes = {mode};
  dyn.classifier.directions = Matrix::Zero(1, 2);
  dyn.classifier.offsets = Vector::Zero(1);
  dyn.classifier.offset_bound = 1.0;
  dyn.b_noise = 0.0;
  dyn.validate();

  RolloutModel model = rollout_model(dyn, 5.0);
  SimulationOptions options = default_options();
  SeededRng rng(2);
  auto batch = simulate_episode(model, dyn, options.policy,
                                options.init_channel, 5, 7, rng);
  CHECK(batch.size() == 7);  // rollout count contract
  for (const auto& traj : batch)
    for (std::size_t h = 1; h < traj.states.size(); ++h)
      CHECK(traj.states[h][0] == doctest::Approx(0.7));
}

TEST_CASE("coupled estimate dominates the assignment estimate per episode") {
  PwaDynamics dyn = stable_two_mode();
  SimulationOptions options = default_options();
  options.eval_stride = 1;
  SimRegReport report = simulation_regret(dyn, 40, options, SeededRng(3));
  CHECK(report.records.size() == 40);
  for (const auto& rec : report.records)
    CHECK(rec.w2_coupled >= rec.w2_assignment - 1e-9);
}

TEST_CASE("perfect model stays at the sampling noise floor") {
  PwaDynamics dyn = stable_two_mode();
  SimulationOptions options = default_options();
  SeededRng rng(4);

  // Self-distance baseline from two independent true-vs-true batches.
  double floor = 0.0;
  const int reps = 20;
  for (int i = 0; i < reps; ++i)
    floor = std::max(floor, simulation_self_distance(dyn, options, rng));

  // Perfect plug-in model: identical maps and classifier, shared noise.
  RolloutModel truth = rollout_model(dyn, options.R);
  for (int i = 0; i < 20; ++i) {
    EpisodeDraws draws = draw_episode(dyn, options.policy,
                                      options.init_channel, options.H,
                                      options.n_rollouts, rng);
    std::vector<Trajectory> a, b;
    for (int r = 0; r < options.n_rollouts; ++r) {
      a.push_back(rollout(truth, draws.z1,
                          draws.inputs[static_cast<std::size_t>(r)],
                          draws.noises[static_cast<std::size_t>(r)]));
      b.push_back(rollout(truth, draws.z1,
                          draws.inputs[static_cast<std::size_t>(r)],
                          draws.noises[static_cast<std::size_t>(r)]));
    }
    const double assign = wasserstein2_empirical(trajectory_features(a),
                                                 trajectory_features(b));
    const double coupled = wasserstein2_coupled(trajectory_features(a),
                                                trajectory_features(b));
    CHECK(assign <= floor + 1e-9);
    CHECK(coupled <= floor + 1e-9);
  }
}

TEST_CASE("learned rollouts with projected maps are nonexpansive in P") {
  PwaDynamics dyn = stable_two_mode();
  SimulationOptions options = default_options();
  options.eval_stride = 5;
  SimRegReport report = simulation_regret(dyn, 60, options, SeededRng(5));
  CHECK(!report.epoch_matched_error.empty());
}

TEST_CASE("per-episode distance shrinks after learning") {
  PwaDynamics dyn = stable_two_mode();
  SimulationOptions options = default_options();
  options.n_rollouts = 48;
  options.epoch_length = 25;
  const int episodes = 400;
  SimRegReport report = simulation_regret(dyn, episodes, options, SeededRng(6));

  auto median_over = [&](int begin, int end) {
    std::vector<double> vals;
    for (const auto& rec : report.records)
      if (rec.episode >= begin && rec.episode < end)
        vals.push_back(rec.w2_assignment);
    std::sort(vals.begin(), vals.end());
    return vals[vals.size() / 2];
  };
  const double early = median_over(0, episodes / 10);
  const double late = median_over(episodes - episodes / 10, episodes);
  CHECK(late <= 0.25 * early);
}

TEST_CASE("simulation reports serialize and hash deterministically") {
  PwaDynamics dyn = stable_two_mode();
  SimulationOptions options = default_options();
  SimRegReport a = simulation_regret(dyn, 30, options, SeededRng(7));
  SimRegReport b = simulation_regret(dyn, 30, options, SeededRng(7));
  CHECK(a.deterministic_hash() == b.deterministic_hash());
  auto j = a.to_json();
  CHECK(j["records"].size() == a.records.size());
  CHECK(j.contains("total_w2_assign"));
}

TEST_CASE("trajectory feature layout") {
  Trajectory traj;
  traj.states = {Vector::Constant(1, 1.0), Vector::Constant(1, 2.0),
                 Vector::Constant(1, 3.0)};
  traj.inputs = {Vector::Constant(1, 10.0), Vector::Constant(1, 20.0)};
  traj.modes = {0, 0};
  Eigen::MatrixXd feats = trajectory_features({traj});
  CHECK(feats.rows() == 1);
  CHECK(feats.cols() == 4);  // (z_1, u_1, z_2, u_2)
  CHECK(feats(0, 0) == 1.0);
  CHECK(feats(0, 1) == 10.0);
  CHECK(feats(0, 2) == 2.0);
  CHECK(feats(0, 3) == 20.0);
}
