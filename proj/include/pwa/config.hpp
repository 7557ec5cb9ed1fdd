#pragma once

// Declarative experiment configuration: a flat JSON document with a fixed
// key set (unknown keys are rejected), plus `--set key=value` overrides and
// a seed-range syntax ("0..9" or "1,4,7").

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace pwa {

struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct ExperimentConfig {
  std::string mode = "regress";
  std::string preset = "two-mode-1d";
  int T = 5000;
  int H = 10;
  std::vector<std::uint64_t> seeds = {0};
  std::string output_dir = "out";

  // learner schedule overrides (negative = use defaults)
  double gamma = -1.0;
  double eta = -1.0;
  int epoch_length = -1;
  int cluster_threshold = -1;
  double delta_sep = -1.0;
  int restarts = -1;

  // instance knobs
  double sigma_dir = 0.2;
  double nu = 0.1;
  double eps_crp = 0.0;
  std::string policy = "fixed";

  // adversary
  std::string learner = "halving";

  // verify-smoothness
  std::string channel = "gaussian";
  double sigma = 1.0;
  int n_samples = 100000;
  int n_directions = 32;
  double tolerance = 0.15;

  // hard-id
  int hard_n = 100;
  double hard_mass = 1.0;
  int hard_runs = 200;

  // erm-check
  int erm_instances = 100;
  int erm_points = 12;

  // simulate
  int n_rollouts = 128;
  int eval_stride = 1;

  bool dump_streams = false;
  int dim = 3;  // channel dimension for verify-smoothness

  static const std::vector<std::string>& known_keys();
  static ExperimentConfig from_json(const nlohmann::json& doc);
  nlohmann::json to_json() const;
  void set_key(const std::string& key, const std::string& value);
  void validate() const;
};

std::vector<std::uint64_t> parse_seed_spec(const std::string& spec);

}  // namespace pwa
