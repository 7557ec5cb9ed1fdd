#include "pwa/config.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>

namespace pwa {

namespace {

std::uint64_t parse_u64(const std::string& s) {
  std::uint64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size())
    throw ConfigError("invalid integer: " + s);
  return v;
}

int parse_int(const std::string& s) {
  int v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size())
    throw ConfigError("invalid integer: " + s);
  return v;
}

double parse_double(const std::string& s) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw ConfigError("invalid number: " + s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("invalid number: " + s);
  }
}

bool parse_bool(const std::string& s) {
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  throw ConfigError("invalid boolean: " + s);
}

}  // namespace

std::vector<std::uint64_t> parse_seed_spec(const std::string& spec) {
  std::vector<std::uint64_t> seeds;
  std::stringstream ss(spec);
  std::string token;
  while (std::getline(ss, token, ',')) {
    if (token.empty()) continue;
    const auto dots = token.find("..");
    if (dots != std::string::npos) {
      const std::uint64_t lo = parse_u64(token.substr(0, dots));
      const std::uint64_t hi = parse_u64(token.substr(dots + 2));
      if (hi < lo) throw ConfigError("empty seed range: " + token);
      for (std::uint64_t s = lo; s <= hi; ++s) seeds.push_back(s);
    } else {
      seeds.push_back(parse_u64(token));
    }
  }
  if (seeds.empty()) throw ConfigError("no seeds in spec: " + spec);
  return seeds;
}

const std::vector<std::string>& ExperimentConfig::known_keys() {
  static const std::vector<std::string> keys = {
      "mode",          "preset",        "T",
      "H",             "seeds",         "output_dir",
      "gamma",         "eta",           "epoch_length",
      "cluster_threshold", "delta_sep", "restarts",
      "sigma_dir",     "nu",            "eps_crp",
      "policy",        "learner",       "channel",
      "sigma",         "n_samples",     "n_directions",
      "tolerance",     "hard_n",        "hard_mass",
      "hard_runs",     "erm_instances", "erm_points",
      "n_rollouts",    "eval_stride",   "dump_streams",
      "dim"};
  return keys;
}

void ExperimentConfig::set_key(const std::string& key,
                               const std::string& value) {
  if (key == "mode") mode = value;
  else if (key == "preset") preset = value;
  else if (key == "T") T = parse_int(value);
  else if (key == "H") H = parse_int(value);
  else if (key == "seeds") seeds = parse_seed_spec(value);
  else if (key == "output_dir") output_dir = value;
  else if (key == "gamma") gamma = parse_double(value);
  else if (key == "eta") eta = parse_double(value);
  else if (key == "epoch_length") epoch_length = parse_int(value);
  else if (key == "cluster_threshold") cluster_threshold = parse_int(value);
  else if (key == "delta_sep") delta_sep = parse_double(value);
  else if (key == "restarts") restarts = parse_int(value);
  else if (key == "sigma_dir") sigma_dir = parse_double(value);
  else if (key == "nu") nu = parse_double(value);
  else if (key == "eps_crp") eps_crp = parse_double(value);
  else if (key == "policy") policy = value;
  else if (key == "learner") learner = value;
  else if (key == "channel") channel = value;
  else if (key == "sigma") sigma = parse_double(value);
  else if (key == "n_samples") n_samples = parse_int(value);
  else if (key == "n_directions") n_directions = parse_int(value);
  else if (key == "tolerance") tolerance = parse_double(value);
  else if (key == "hard_n") hard_n = parse_int(value);
  else if (key == "hard_mass") hard_mass = parse_double(value);
  else if (key == "hard_runs") hard_runs = parse_int(value);
  else if (key == "erm_instances") erm_instances = parse_int(value);
  else if (key == "erm_points") erm_points = parse_int(value);
  else if (key == "n_rollouts") n_rollouts = parse_int(value);
  else if (key == "eval_stride") eval_stride = parse_int(value);
  else if (key == "dump_streams") dump_streams = parse_bool(value);
  else if (key == "dim") dim = parse_int(value);
  else throw ConfigError("unknown config key: " + key);
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  ExperimentConfig cfg;
  const auto& keys = known_keys();
  for (const auto& [key, value] : doc.items()) {
    if (std::find(keys.begin(), keys.end(), key) == keys.end())
      throw ConfigError("unknown config key: " + key);
    if (key == "seeds") {
      if (value.is_string()) {
        cfg.seeds = parse_seed_spec(value.get<std::string>());
      } else if (value.is_array()) {
        cfg.seeds.clear();
        for (const auto& v : value) cfg.seeds.push_back(v.get<std::uint64_t>());
        if (cfg.seeds.empty()) throw ConfigError("seeds must be nonempty");
      } else {
        throw ConfigError("seeds must be a string spec or an array");
      }
      continue;
    }
    if (value.is_string())
      cfg.set_key(key, value.get<std::string>());
    else if (value.is_boolean())
      cfg.set_key(key, value.get<bool>() ? "true" : "false");
    else
      cfg.set_key(key, value.dump());
  }
  cfg.validate();
  return cfg;
}

nlohmann::json ExperimentConfig::to_json() const {
  return nlohmann::json{{"mode", mode},
                        {"preset", preset},
                        {"T", T},
                        {"H", H},
                        {"seeds", seeds},
                        {"output_dir", output_dir},
                        {"gamma", gamma},
                        {"eta", eta},
                        {"epoch_length", epoch_length},
                        {"cluster_threshold", cluster_threshold},
                        {"delta_sep", delta_sep},
                        {"restarts", restarts},
                        {"sigma_dir", sigma_dir},
                        {"nu", nu},
                        {"eps_crp", eps_crp},
                        {"policy", policy},
                        {"learner", learner},
                        {"channel", channel},
                        {"sigma", sigma},
                        {"n_samples", n_samples},
                        {"n_directions", n_directions},
                        {"tolerance", tolerance},
                        {"hard_n", hard_n},
                        {"hard_mass", hard_mass},
                        {"hard_runs", hard_runs},
                        {"erm_instances", erm_instances},
                        {"erm_points", erm_points},
                        {"n_rollouts", n_rollouts},
                        {"eval_stride", eval_stride},
                        {"dump_streams", dump_streams},
                        {"dim", dim}};
}

void ExperimentConfig::validate() const {
  static const std::vector<std::string> modes = {
      "regress",  "dynamics",          "simulate", "adversary",
      "hard-id",  "verify-smoothness", "erm-check"};
  if (std::find(modes.begin(), modes.end(), mode) == modes.end())
    throw ConfigError("unknown mode: " + mode);
  if (T < 1) throw ConfigError("T must be >= 1");
  if (H < 1) throw ConfigError("H must be >= 1");
  if (seeds.empty()) throw ConfigError("need at least one seed");
  if (sigma_dir <= 0) throw ConfigError("sigma_dir must be > 0");
  if (nu < 0) throw ConfigError("nu must be >= 0");
  if (eps_crp < 0) throw ConfigError("eps_crp must be >= 0");
  if (channel != "gaussian" && channel != "uniform_ball")
    throw ConfigError("channel must be gaussian or uniform_ball");
  if (policy != "fixed" && policy != "random-walk" &&
      policy != "boundary-hugging")
    throw ConfigError("policy must be fixed, random-walk, or boundary-hugging");
  if (n_rollouts < 2) throw ConfigError("n_rollouts must be >= 2");
  if (eval_stride < 1) throw ConfigError("eval_stride must be >= 1");
  if (dim < 1) throw ConfigError("dim must be >= 1");
}

}  // namespace pwa
