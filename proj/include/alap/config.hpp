#pragma once

#include <cstdint>
#include <json.hpp>
#include <string>
#include <vector>

#include "alap/forcing.hpp"
#include "alap/nfunction.hpp"
#include "alap/solver.hpp"

namespace alap {

/// "power:2.5" or "plog:2,1".
NFunction parse_nfunction(const std::string& spec);
/// {"family": "power", "p": 2.5} or {"family": "plog", "p": 2, "q": 1}; a
/// plain string is handed to parse_nfunction.
NFunction nfunction_from_json(const nlohmann::json& j);

/// Reads the subset of TOML used by config files (tables, dotted-free keys,
/// strings, numbers, booleans, arrays and inline tables) into JSON.
nlohmann::json parse_toml(const std::string& text);

/// Parses a config file as TOML when the extension is .toml, else as JSON.
nlohmann::json load_config_file(const std::string& path);

struct PairSpec {
  std::string A;
  std::string B;
};

struct BallSampling {
  int count = 50;
  double min_radius = 1.0 / 16.0;  // fraction of L
  double max_radius = 1.0 / 4.0;   // fraction of L
};

struct ExperimentConfig {
  std::vector<std::string> nfunctions;
  std::vector<PairSpec> pairs;
  int dimension = 2;
  std::vector<int> resolutions;
  std::vector<std::uint64_t> seeds;
  ForcingSpec forcing;
  BallSampling balls;
  std::vector<double> deltas{0.5};
  int inequality_trials = 10000;
  double inequality_range = 100.0;
  int kernel_trials = 10000;
  int monotonicity_trials = 100000;
  /// Gradient-field seeds run alongside the random ones in the
  /// integrability study.
  int gradient_seeds = 3;
  /// Solver overrides; unset fields keep the per-N-function defaults.
  nlohmann::json solver = nlohmann::json::object();
  std::string out_dir = "out";

  void validate() const;
};

/// Defaults for a subcommand, before the config file and flags are applied.
ExperimentConfig default_config(const std::string& command);

/// Overlays the keys present in j onto cfg.
void apply_json(ExperimentConfig& cfg, const nlohmann::json& j);

SolverConfig solver_config_for(const ExperimentConfig& cfg, const NFunction& nf);

}  // namespace alap
