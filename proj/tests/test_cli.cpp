#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "pwa/config.hpp"
#include "pwa/runner.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>

using namespace pwa;

TEST_CASE("seed spec parsing") {
  CHECK(parse_seed_spec("0..3") == std::vector<std::uint64_t>{0, 1, 2, 3});
  CHECK(parse_seed_spec("5") == std::vector<std::uint64_t>{5});
  CHECK(parse_seed_spec("1,4,7") == std::vector<std::uint64_t>{1, 4, 7});
  CHECK(parse_seed_spec("2..3,9") == std::vector<std::uint64_t>{2, 3, 9});
  CHECK_THROWS_AS(parse_seed_spec("9..2"), ConfigError);
  CHECK_THROWS_AS(parse_seed_spec(""), ConfigError);
}

TEST_CASE("config rejects unknown keys and bad values") {
  nlohmann::json doc{{"mode", "regress"}, {"bogus", 1}};
  CHECK_THROWS_AS(ExperimentConfig::from_json(doc), ConfigError);

  nlohmann::json bad_mode{{"mode", "fly"}};
  CHECK_THROWS_AS(ExperimentConfig::from_json(bad_mode), ConfigError);

  ExperimentConfig cfg;
  CHECK_THROWS_AS(cfg.set_key("nope", "1"), ConfigError);
  CHECK_THROWS_AS(cfg.set_key("T", "abc"), ConfigError);
  cfg.set_key("T", "123");
  CHECK(cfg.T == 123);
  cfg.set_key("seeds", "0..2");
  CHECK(cfg.seeds.size() == 3);
}

TEST_CASE("config json round trip") {
  ExperimentConfig cfg;
  cfg.mode = "adversary";
  cfg.T = 321;
  cfg.seeds = {3, 5};
  ExperimentConfig back = ExperimentConfig::from_json(cfg.to_json());
  CHECK(back.mode == "adversary");
  CHECK(back.T == 321);
  CHECK(back.seeds == std::vector<std::uint64_t>{3, 5});
}

TEST_CASE("adversary experiment end to end") {
  ExperimentConfig cfg;
  cfg.mode = "adversary";
  cfg.T = 200;
  cfg.seeds = parse_seed_spec("0..19");
  cfg.learner = "halving";
  ExperimentResult result = run_experiment(cfg);
  CHECK(result.outcomes.size() == 20);
  const double mean = result.summary["headline_mean"].get<double>();
  CHECK(mean > 0.35);
  CHECK(mean < 0.65);
}

TEST_CASE("identical configs give identical hashes") {
  ExperimentConfig cfg;
  cfg.mode = "regress";
  cfg.preset = "two-mode-1d";
  cfg.T = 600;
  cfg.epoch_length = 100;
  cfg.restarts = 2;
  cfg.seeds = {0, 1};
  ExperimentResult a = run_experiment(cfg);
  ExperimentResult b = run_experiment(cfg);
  CHECK(a.combined_hash == b.combined_hash);
  // Different seeds change the digest.
  cfg.seeds = {2, 3};
  ExperimentResult c = run_experiment(cfg);
  CHECK(a.combined_hash != c.combined_hash);
}

TEST_CASE("file outputs: one report per seed plus merged summaries") {
  namespace fs = std::filesystem;
  ExperimentConfig cfg;
  cfg.mode = "regress";
  cfg.T = 300;
  cfg.epoch_length = 60;
  cfg.restarts = 2;
  cfg.seeds = parse_seed_spec("0..2");
  cfg.output_dir = (fs::temp_directory_path() / "pwa_cli_test_out").string();
  fs::remove_all(cfg.output_dir);
  ExperimentResult result = run_experiment(cfg);
  write_outputs(result);
  for (std::uint64_t s = 0; s <= 2; ++s) {
    CHECK(fs::exists(fs::path(cfg.output_dir) /
                     ("report_" + std::to_string(s) + ".json")));
    CHECK(fs::exists(fs::path(cfg.output_dir) /
                     ("series_" + std::to_string(s) + ".csv")));
  }
  CHECK(fs::exists(fs::path(cfg.output_dir) / "summary.csv"));
  // Report JSON parses and echoes the config.
  std::ifstream in(fs::path(cfg.output_dir) / "report_0.json");
  nlohmann::json doc = nlohmann::json::parse(in);
  CHECK(doc["config"]["mode"] == "regress");
  CHECK(doc.contains("generated_at"));
  fs::remove_all(cfg.output_dir);
}

TEST_CASE("sweep cardinality and cap") {
  ExperimentConfig base;
  base.mode = "adversary";
  base.T = 50;
  base.seeds = {0};

  // Empty grid runs the base config only.
  ExperimentResult none = run_sweep(base, {}, 16);
  CHECK(none.outcomes.size() == 1);

  std::map<std::string, std::vector<std::string>> grid{
      {"T", {"50", "100"}}, {"learner", {"halving", "majority"}}};
  ExperimentResult four = run_sweep(base, grid, 16);
  CHECK(four.outcomes.size() == 4);
  CHECK(four.summary["cells"] == 4);

  CHECK_THROWS_AS(run_sweep(base, grid, 3), ConfigError);
}

TEST_CASE("verify-smoothness and erm-check headline contracts") {
  ExperimentConfig cfg;
  cfg.mode = "verify-smoothness";
  cfg.channel = "gaussian";
  cfg.sigma = 1.0;
  cfg.dim = 2;
  cfg.n_samples = 20000;
  cfg.n_directions = 8;
  cfg.seeds = {0};
  ExperimentResult smooth = run_experiment(cfg);
  CHECK(smooth.outcomes[0].report["pass"].get<bool>());

  ExperimentConfig erm;
  erm.mode = "erm-check";
  erm.erm_instances = 10;
  erm.erm_points = 10;
  erm.seeds = {0};
  ExperimentResult check = run_experiment(erm);
  CHECK(check.outcomes[0].report["beaten"].get<int>() == 0);
}
