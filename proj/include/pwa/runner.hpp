#pragma once

// Experiment runner behind the CLI: builds preset instances, fans seeds out
// over a worker pool, merges results deterministically by seed order, and
// writes report/series/summary files.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "pwa/config.hpp"
#include "pwa/dynamics.hpp"
#include "pwa/generators.hpp"
#include "pwa/simulation.hpp"

#include "json.hpp"

namespace pwa {

struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SeedOutcome {
  std::uint64_t seed = 0;
  nlohmann::json report;            // report_<seed>.json payload
  std::vector<std::string> series;  // series_<seed>.csv rows (with header)
  std::string summary_line;         // one line printed per seed
  std::uint64_t hash = 0;
  double headline = 0.0;  // mode-specific scalar (regret/T, mistake rate, ...)
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<SeedOutcome> outcomes;  // seed order
  nlohmann::json summary;
  std::uint64_t combined_hash = 0;
};

// Preset instances.
PwaRegressionModel build_regression_preset(const ExperimentConfig& cfg);
CovariatePolicy build_covariate_policy(const ExperimentConfig& cfg,
                                       const PwaRegressionModel& model);
PwaDynamics build_dynamics_preset(const ExperimentConfig& cfg);

LearnerOptions build_learner_options(const ExperimentConfig& cfg, int T,
                                     const Dimensions& dims);

// Single-seed runs (used directly by tests and the acceptance suite).
RunReport run_regression_seed(const ExperimentConfig& cfg, std::uint64_t seed);
RunReport run_dynamics_seed(const ExperimentConfig& cfg, std::uint64_t seed);
SimRegReport run_simulation_seed(const ExperimentConfig& cfg,
                                 std::uint64_t seed);

// Full experiment over all configured seeds (parallel, deterministic merge).
ExperimentResult run_experiment(const ExperimentConfig& cfg);

// Cartesian sweep over per-key value lists layered onto the base config.
ExperimentResult run_sweep(const ExperimentConfig& base,
                           const std::map<std::string, std::vector<std::string>>& grid,
                           int max_cells = 256);

// Writes report_<seed>.json, series_<seed>.csv, and summary.csv under
// cfg.output_dir. Returns the number of files written.
int write_outputs(const ExperimentResult& result);

int worker_count();

}  // namespace pwa
