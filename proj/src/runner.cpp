#include "pwa/runner.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "pwa/erm.hpp"
#include "pwa/hash.hpp"
#include "pwa/learner.hpp"
#include "pwa/metrics.hpp"
#include "pwa/smoothing.hpp"

namespace pwa {

int worker_count() {
  if (const char* env = std::getenv("PWA_WORKERS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return static_cast<int>(std::min(8u, std::max(1u, hw)));
}

// ---------------------------------------------------------------------------
// Presets.

namespace {

AffineMap make_map(const Matrix& m, Real R) {
  AffineMap map;
  map.matrix = m;
  map.frobenius_bound = R;
  return map;
}

NoiseChannel covariate_channel(const ExperimentConfig& cfg, int d) {
  // Channel with the requested directional-smoothness constant.
  return NoiseChannel::gaussian_with_sigma_dir(d, cfg.sigma_dir);
}

}  // namespace

PwaRegressionModel build_regression_preset(const ExperimentConfig& cfg) {
  PwaRegressionModel model;
  if (cfg.preset == "two-mode-1d") {
    model.dims = Dimensions{1, 1, 2};
    Matrix m1(1, 2), m2(1, 2);
    m1 << 0.5, 0.5;
    m2 << -0.5, -0.3;
    model.R = 2.0;
    model.maps = {make_map(m1, model.R), make_map(m2, model.R)};
    model.classifier.directions = Matrix(2, 1);
    model.classifier.directions << -1.0, 1.0;  // mode 0 on x <= 0
    model.classifier.offsets = Vector::Zero(2);
    model.B = 2.0;
    model.delta_sep = 1.0;
  } else if (cfg.preset == "three-mode-2d") {
    model.dims = Dimensions{2, 2, 3};
    Matrix m1(2, 3), m2(2, 3), m3(2, 3);
    m1 << 0.6, 0.0, 0.2, 0.0, 0.4, -0.1;
    m2 << -0.5, 0.2, 0.0, 0.3, -0.6, 0.4;
    m3 << 0.1, 0.9, -0.3, -0.6, 0.1, 0.5;
    model.R = 2.0;
    model.maps = {make_map(m1, model.R), make_map(m2, model.R),
                  make_map(m3, model.R)};
    model.classifier.directions = Matrix(3, 2);
    for (int i = 0; i < 3; ++i) {
      const double angle = 2.0 * M_PI * i / 3.0;
      model.classifier.directions(i, 0) = std::cos(angle);
      model.classifier.directions(i, 1) = std::sin(angle);
    }
    model.classifier.offsets = Vector::Zero(3);
    model.B = 3.0;
    model.delta_sep = 1.0;
  } else {
    throw ConfigError("unknown regression preset: " + cfg.preset);
  }
  model.classifier.offset_bound = model.B;
  model.nu = cfg.nu;
  model.eps_crp = cfg.eps_crp;
  model.channel = covariate_channel(cfg, model.dims.d);
  if (cfg.delta_sep > 0) model.delta_sep = cfg.delta_sep;
  model.validate();
  return model;
}

CovariatePolicy build_covariate_policy(const ExperimentConfig& cfg,
                                       const PwaRegressionModel& model) {
  const Vector origin = Vector::Zero(model.dims.d);
  if (cfg.policy == "fixed") return CovariatePolicy::fixed(origin);
  if (cfg.policy == "random-walk")
    return CovariatePolicy::random_walk(origin, 0.05, 0.5);
  if (cfg.policy == "boundary-hugging")
    return CovariatePolicy::boundary_hugging(origin, 0.5);
  throw ConfigError("unknown covariate policy: " + cfg.policy);
}

PwaDynamics build_dynamics_preset(const ExperimentConfig& cfg) {
  PwaDynamics dyn;
  if (cfg.preset == "sim-two-mode" || cfg.preset == "dyn-two-mode" ||
      cfg.preset == "two-mode-1d") {
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
    // Bounded process noise with the configured smoothness constant.
    dyn.process_noise = NoiseChannel::uniform_ball(1, 2.0 * cfg.sigma_dir);
    dyn.b_noise = 2.0 * cfg.sigma_dir;
    dyn.lyapunov = Matrix::Identity(1, 1);
  } else {
    throw ConfigError("unknown dynamics preset: " + cfg.preset);
  }
  dyn.validate();
  return dyn;
}

LearnerOptions build_learner_options(const ExperimentConfig& cfg, int T,
                                     const Dimensions& dims) {
  LearnerOptions options;
  options.hinge.epoch_length =
      cfg.epoch_length > 0 ? cfg.epoch_length
                           : std::max(40, std::min(200, T / 5));
  options.hinge.gamma = cfg.gamma > 0 ? cfg.gamma : 0.05;
  options.hinge.eta =
      cfg.eta > 0 ? cfg.eta
                  : 2.0 * options.hinge.gamma *
                        std::sqrt(static_cast<double>(dims.K) / T);
  options.hinge.cluster_threshold = cfg.cluster_threshold;
  options.hinge.delta_sep = cfg.delta_sep > 0 ? cfg.delta_sep : 1.0;
  options.erm.restarts = cfg.restarts > 0 ? cfg.restarts : 4;
  options.erm.max_iter = 25;
  return options;
}

// ---------------------------------------------------------------------------
// Single-seed runs.

RunReport run_regression_seed(const ExperimentConfig& cfg, std::uint64_t seed) {
  PwaRegressionModel model = build_regression_preset(cfg);
  RegressionStream stream(model, build_covariate_policy(cfg, model),
                          SeededRng(seed, 1));
  LearnerOptions options = build_learner_options(cfg, cfg.T, model.dims);
  RunReport report =
      run_online_learner([&stream]() { return stream.next(); }, cfg.T,
                         model.dims, model.R, options, &model.maps,
                         SeededRng(seed, 2));
  report.seed = seed;
  report.clip_rate = stream.clip_rate();
  report.config_echo = cfg.to_json();
  return report;
}

RunReport run_dynamics_seed(const ExperimentConfig& cfg, std::uint64_t seed) {
  PwaDynamics dyn = build_dynamics_preset(cfg);
  InputPolicy policy;
  policy.gain = Matrix::Constant(1, 1, 0.3);
  policy.nominal = Vector::Zero(1);
  policy.exploration = NoiseChannel::uniform_ball(1, 0.4);
  OneStepOptions options;
  Dimensions dims{dyn.d_z + dyn.d_u, dyn.d_z, dyn.K};
  options.learner = build_learner_options(cfg, cfg.T, dims);
  options.R = 5.0;
  RunReport report =
      one_step_prediction_run(dyn, policy, cfg.T, options, SeededRng(seed, 3));
  report.seed = seed;
  report.config_echo = cfg.to_json();
  return report;
}

SimRegReport run_simulation_seed(const ExperimentConfig& cfg,
                                 std::uint64_t seed) {
  PwaDynamics dyn = build_dynamics_preset(cfg);
  SimulationOptions options;
  options.H = cfg.H;
  options.n_rollouts = cfg.n_rollouts;
  options.epoch_length = cfg.epoch_length > 0 ? cfg.epoch_length
                                              : std::max(10, cfg.T / 20);
  options.eval_stride = cfg.eval_stride;
  options.R = 5.0;
  options.hinge.epoch_length = options.epoch_length;
  options.hinge.gamma = cfg.gamma > 0 ? cfg.gamma : 0.05;
  options.hinge.eta = cfg.eta > 0 ? cfg.eta : 0.01;
  options.hinge.cluster_threshold = cfg.cluster_threshold;
  options.hinge.delta_sep = cfg.delta_sep > 0 ? cfg.delta_sep : 1.0;
  options.erm.restarts = cfg.restarts > 0 ? cfg.restarts : 2;
  options.policy.nominal = Vector::Zero(1);
  options.policy.exploration = NoiseChannel::uniform_ball(1, 0.5);
  options.init_channel = NoiseChannel::uniform_ball(1, 0.3);
  SimRegReport report =
      simulation_regret(dyn, cfg.T, options, SeededRng(seed, 4));
  report.seed = seed;
  report.config_echo = cfg.to_json();
  return report;
}

// ---------------------------------------------------------------------------
// Mode-specific seed outcomes.

namespace {

SeedOutcome regression_outcome(const ExperimentConfig& cfg,
                               std::uint64_t seed) {
  RunReport report = run_regression_seed(cfg, seed);
  SeedOutcome out;
  out.seed = seed;
  out.report = report.to_json();
  out.hash = report.deterministic_hash();
  out.headline = report.total_regret / cfg.T;
  std::vector<std::string> rows;
  rows.push_back("t,regret_increment,cumulative_regret,mistake,epoch");
  for (int t = 0; t < report.T; ++t) {
    std::ostringstream row;
    row << t << ',' << report.regret_increments[static_cast<std::size_t>(t)]
        << ',' << report.cumulative_regret[static_cast<std::size_t>(t)] << ','
        << static_cast<int>(report.mistake_flags[static_cast<std::size_t>(t)])
        << ',' << report.epoch_of_t[static_cast<std::size_t>(t)];
    rows.push_back(row.str());
  }
  out.series = std::move(rows);
  std::ostringstream line;
  line << "seed " << seed << ": regret/T " << out.headline << ", mistakes "
       << report.total_mistakes << ", clip_rate " << report.clip_rate
       << ", hash " << report.deterministic_hash_hex();
  out.summary_line = line.str();
  return out;
}

SeedOutcome dynamics_outcome(const ExperimentConfig& cfg, std::uint64_t seed) {
  RunReport report = run_dynamics_seed(cfg, seed);
  SeedOutcome out;
  out.seed = seed;
  out.report = report.to_json();
  out.hash = report.deterministic_hash();
  out.headline = report.total_regret / cfg.T;
  std::vector<std::string> rows;
  rows.push_back("t,regret_increment,cumulative_regret,mistake,epoch");
  for (int t = 0; t < report.T; ++t) {
    std::ostringstream row;
    row << t << ',' << report.regret_increments[static_cast<std::size_t>(t)]
        << ',' << report.cumulative_regret[static_cast<std::size_t>(t)] << ','
        << static_cast<int>(report.mistake_flags[static_cast<std::size_t>(t)])
        << ',' << report.epoch_of_t[static_cast<std::size_t>(t)];
    rows.push_back(row.str());
  }
  out.series = std::move(rows);
  std::ostringstream line;
  line << "seed " << seed << ": excess/T " << out.headline << ", noise floor "
       << report.noise_floor << ", smoothness " << report.covariate_smoothness;
  out.summary_line = line.str();
  return out;
}

SeedOutcome simulation_outcome(const ExperimentConfig& cfg,
                               std::uint64_t seed) {
  SimRegReport report = run_simulation_seed(cfg, seed);
  SeedOutcome out;
  out.seed = seed;
  out.report = report.to_json();
  out.hash = report.deterministic_hash();
  out.headline = report.records.empty()
                     ? 0.0
                     : report.total_assignment /
                           static_cast<double>(report.records.size());
  std::vector<std::string> rows;
  rows.push_back("episode,w2_assign,w2_coupled,cumulative");
  for (const auto& rec : report.records) {
    std::ostringstream row;
    row << rec.episode << ',' << rec.w2_assignment << ',' << rec.w2_coupled
        << ',' << rec.cumulative_assignment;
    rows.push_back(row.str());
  }
  out.series = std::move(rows);
  std::ostringstream line;
  line << "seed " << seed << ": mean W2^2 " << out.headline << " over "
       << report.records.size() << " evaluated episodes";
  out.summary_line = line.str();
  return out;
}

SeedOutcome adversary_outcome(const ExperimentConfig& cfg,
                              std::uint64_t seed) {
  SeededRng rng(seed, 5);
  AdversaryStream stream = adversarial_threshold_stream(cfg.T, rng);
  const int mistakes =
      adversary_mistakes(stream, ThresholdLearner::by_name(cfg.learner));
  SeedOutcome out;
  out.seed = seed;
  out.headline = static_cast<double>(mistakes) / cfg.T;
  Fnv1a h;
  h.update(static_cast<std::int64_t>(seed));
  h.update(static_cast<std::int64_t>(mistakes));
  h.update(stream.theta_star);
  out.hash = h.digest();
  out.report = nlohmann::json{{"schema_version", 1},
                              {"seed", seed},
                              {"T", cfg.T},
                              {"learner", cfg.learner},
                              {"mistakes", mistakes},
                              {"mistake_rate", out.headline},
                              {"theta_star", stream.theta_star},
                              {"config", cfg.to_json()}};
  std::ostringstream line;
  line << "seed " << seed << ": mistake rate " << out.headline;
  out.summary_line = line.str();
  return out;
}

// Random-input explorer for the hard identification instance: inputs are
// uniform over the span of all candidate third-mode segments, the estimate
// is the first residual of magnitude at least mass/2 (zero if none).
bool hard_id_estimate_fails(int N, int j, int iota, double mass, int T,
                            SeededRng& rng) {
  NoiseChannel quiet = NoiseChannel::uniform_ball(1, 1e-12);
  PwaDynamics dyn = hard_identification_instance(N, j, iota, mass, quiet, 0.0);
  const double lo = 1.0;
  const double hi = 1.0 + (2.0 * N + 1.0) / N;
  Vector z = Vector::Zero(1);
  double m_hat = 0.0;
  bool found = false;
  for (int t = 0; t < T; ++t) {
    Vector u = Vector::Constant(1, rng.uniform(lo, hi));
    StepResult r = step(dyn, z, u, rng);
    const double residual = r.z_next[0] - u[0];
    if (!found && std::abs(residual) >= mass / 2.0) {
      m_hat = residual;
      found = true;
    }
    z = r.z_next;
  }
  return std::abs(m_hat - iota * mass) >= mass;
}

SeedOutcome hard_id_outcome(const ExperimentConfig& cfg, std::uint64_t seed) {
  SeededRng rng(seed, 6);
  int failures = 0;
  for (int run = 0; run < cfg.hard_runs; ++run) {
    const int j = 1 + static_cast<int>(rng.uniform_index(
                          static_cast<std::uint64_t>(2 * cfg.hard_n)));
    const int iota = rng.sign();
    if (hard_id_estimate_fails(cfg.hard_n, j, iota, cfg.hard_mass, cfg.T, rng))
      ++failures;
  }
  SeedOutcome out;
  out.seed = seed;
  out.headline = static_cast<double>(failures) / cfg.hard_runs;
  Fnv1a h;
  h.update(static_cast<std::int64_t>(seed));
  h.update(static_cast<std::int64_t>(failures));
  out.hash = h.digest();
  out.report = nlohmann::json{
      {"schema_version", 1},
      {"seed", seed},
      {"N", cfg.hard_n},
      {"T", cfg.T},
      {"runs", cfg.hard_runs},
      {"failures", failures},
      {"failure_rate", out.headline},
      {"information_bound", 0.5 * (1.0 - static_cast<double>(cfg.T) /
                                             cfg.hard_n)},
      {"config", cfg.to_json()}};
  std::ostringstream line;
  line << "seed " << seed << ": |m_hat - m| >= m on " << failures << "/"
       << cfg.hard_runs << " runs";
  out.summary_line = line.str();
  return out;
}

SeedOutcome smoothness_outcome(const ExperimentConfig& cfg,
                               std::uint64_t seed) {
  NoiseChannel channel =
      cfg.channel == "gaussian"
          ? NoiseChannel::gaussian(cfg.dim, cfg.sigma)
          : NoiseChannel::uniform_ball(cfg.dim, cfg.sigma);
  SeededRng rng(seed, 7);
  Vector z = Vector::Zero(cfg.dim);
  SmoothnessReport report = estimate_directional_smoothness(
      channel, z, cfg.n_samples, cfg.n_directions, 0.0, rng, cfg.tolerance);
  SeedOutcome out;
  out.seed = seed;
  out.headline = report.worst_density;
  Fnv1a h;
  h.update(static_cast<std::int64_t>(seed));
  h.update(report.worst_density);
  out.hash = h.digest();
  nlohmann::json doc = report.to_json();
  doc["seed"] = seed;
  doc["config"] = cfg.to_json();
  out.report = doc;
  std::ostringstream line;
  line << "seed " << seed << ": " << (report.pass ? "PASS" : "FAIL")
       << " worst density " << report.worst_density << " vs ceiling "
       << report.bound_density << " (definition ceiling "
       << report.bound_definition << ")";
  out.summary_line = line.str();
  return out;
}

SeedOutcome erm_check_outcome(const ExperimentConfig& cfg,
                              std::uint64_t seed) {
  SeededRng rng(seed, 8);
  int matched = 0, beaten = 0;
  double worst_gap = 0.0;
  for (int inst = 0; inst < cfg.erm_instances; ++inst) {
    const int n = std::max(4, cfg.erm_points);
    std::vector<Vector> xbars, ys;
    const double boundary = rng.uniform(-0.5, 0.5);
    Matrix m1(1, 2), m2(1, 2);
    m1 << rng.uniform(-1, 1), rng.uniform(-1, 1);
    m2 << rng.uniform(-1, 1), rng.uniform(-1, 1);
    for (int i = 0; i < n; ++i) {
      const double x = rng.uniform(-1.0, 1.0);
      Vector xbar(2);
      xbar << x, 1.0;
      Vector y = (x <= boundary ? m1 : m2) * xbar;
      y[0] += 0.1 * rng.gaussian();
      xbars.push_back(xbar);
      ys.push_back(y);
    }
    ErmFit brute = brute_force_erm(xbars, ys, 2, 100.0);
    ErmOptions opts;
    opts.restarts = 32;
    SeededRng fit_rng = rng.substream(static_cast<std::uint64_t>(inst));
    ErmFit heur = fit_heuristic(xbars, ys, 2, 100.0, fit_rng, opts);
    const double gap = heur.objective - brute.objective;
    worst_gap = std::max(worst_gap, gap);
    if (gap <= 1e-6) ++matched;
    if (gap < -1e-9) ++beaten;
  }
  SeedOutcome out;
  out.seed = seed;
  out.headline = static_cast<double>(matched) / cfg.erm_instances;
  Fnv1a h;
  h.update(static_cast<std::int64_t>(seed));
  h.update(static_cast<std::int64_t>(matched));
  out.hash = h.digest();
  out.report = nlohmann::json{{"schema_version", 1},
                              {"seed", seed},
                              {"instances", cfg.erm_instances},
                              {"matched", matched},
                              {"beaten", beaten},
                              {"worst_gap", worst_gap},
                              {"config", cfg.to_json()}};
  std::ostringstream line;
  line << "seed " << seed << ": heuristic matched the exact oracle on "
       << matched << "/" << cfg.erm_instances
       << " instances (infimum violations: " << beaten << ")";
  out.summary_line = line.str();
  return out;
}

SeedOutcome run_seed(const ExperimentConfig& cfg, std::uint64_t seed) {
  if (cfg.mode == "regress") return regression_outcome(cfg, seed);
  if (cfg.mode == "dynamics") return dynamics_outcome(cfg, seed);
  if (cfg.mode == "simulate") return simulation_outcome(cfg, seed);
  if (cfg.mode == "adversary") return adversary_outcome(cfg, seed);
  if (cfg.mode == "hard-id") return hard_id_outcome(cfg, seed);
  if (cfg.mode == "verify-smoothness") return smoothness_outcome(cfg, seed);
  if (cfg.mode == "erm-check") return erm_check_outcome(cfg, seed);
  throw ConfigError("unknown mode: " + cfg.mode);
}

}  // namespace

// ---------------------------------------------------------------------------
// Experiment driver.

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  ExperimentResult result;
  result.config = cfg;
  result.outcomes.resize(cfg.seeds.size());

  const int workers =
      std::min<int>(worker_count(), static_cast<int>(cfg.seeds.size()));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto work = [&]() {
    for (;;) {
      const std::size_t idx = next.fetch_add(1);
      if (idx >= cfg.seeds.size()) return;
      try {
        result.outcomes[idx] = run_seed(cfg, cfg.seeds[idx]);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        return;
      }
    }
  };

  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);

  // Deterministic merge in seed order (outcomes are already slotted).
  Fnv1a combined;
  std::vector<double> headlines;
  for (const auto& out : result.outcomes) {
    combined.update(static_cast<std::int64_t>(out.hash));
    headlines.push_back(out.headline);
  }
  result.combined_hash = combined.digest();

  std::vector<double> sorted = headlines;
  std::sort(sorted.begin(), sorted.end());
  const double median = sorted.empty() ? 0.0 : sorted[sorted.size() / 2];
  double mean = 0.0;
  for (double h : headlines) mean += h;
  if (!headlines.empty()) mean /= static_cast<double>(headlines.size());

  result.summary = nlohmann::json{
      {"mode", cfg.mode},
      {"seeds", cfg.seeds.size()},
      {"headline_mean", mean},
      {"headline_median", median},
      {"combined_hash", result.combined_hash}};
  return result;
}

ExperimentResult run_sweep(
    const ExperimentConfig& base,
    const std::map<std::string, std::vector<std::string>>& grid,
    int max_cells) {
  // Cartesian product of the override lists; empty grid = base config only.
  std::vector<std::map<std::string, std::string>> cells{{}};
  for (const auto& [key, values] : grid) {
    if (values.empty()) throw ConfigError("empty sweep values for " + key);
    std::vector<std::map<std::string, std::string>> expanded;
    for (const auto& cell : cells)
      for (const auto& value : values) {
        auto next = cell;
        next[key] = value;
        expanded.push_back(std::move(next));
      }
    cells = std::move(expanded);
  }
  if (static_cast<int>(cells.size()) > max_cells)
    throw ConfigError("sweep grid exceeds the cell cap");

  ExperimentResult merged;
  merged.config = base;
  nlohmann::json cell_summaries = nlohmann::json::array();
  Fnv1a combined;
  for (const auto& cell : cells) {
    ExperimentConfig cfg = base;
    for (const auto& [key, value] : cell) cfg.set_key(key, value);
    cfg.validate();
    ExperimentResult res = run_experiment(cfg);
    nlohmann::json overrides = nlohmann::json::object();
    for (const auto& [key, value] : cell) overrides[key] = value;
    nlohmann::json cs = res.summary;
    cs["overrides"] = overrides;
    cell_summaries.push_back(cs);
    combined.update(static_cast<std::int64_t>(res.combined_hash));
    for (auto& out : res.outcomes) merged.outcomes.push_back(std::move(out));
  }
  merged.combined_hash = combined.digest();
  merged.summary = nlohmann::json{{"mode", base.mode},
                                  {"cells", cells.size()},
                                  {"cell_summaries", cell_summaries},
                                  {"combined_hash", merged.combined_hash}};
  return merged;
}

int write_outputs(const ExperimentResult& result) {
  namespace fs = std::filesystem;
  fs::create_directories(result.config.output_dir);
  int files = 0;
  for (const auto& out : result.outcomes) {
    nlohmann::json doc = out.report;
    doc["generated_at"] = "";  // excluded from the determinism hash
    {
      std::ofstream f(fs::path(result.config.output_dir) /
                      ("report_" + std::to_string(out.seed) + ".json"));
      f << doc.dump(2) << '\n';
      ++files;
    }
    if (!out.series.empty()) {
      std::ofstream f(fs::path(result.config.output_dir) /
                      ("series_" + std::to_string(out.seed) + ".csv"));
      for (const auto& row : out.series) f << row << '\n';
      ++files;
    }
  }
  {
    std::ofstream f(fs::path(result.config.output_dir) / "summary.csv");
    f << "seed,headline,hash\n";
    for (const auto& out : result.outcomes) {
      char hex[20];
      std::snprintf(hex, sizeof(hex), "%016llx",
                    static_cast<unsigned long long>(out.hash));
      f << out.seed << ',' << out.headline << ',' << hex << '\n';
    }
    ++files;
  }
  {
    std::ofstream f(fs::path(result.config.output_dir) / "summary.json");
    f << result.summary.dump(2) << '\n';
    ++files;
  }
  return files;
}

}  // namespace pwa
