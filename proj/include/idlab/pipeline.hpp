#pragma once

#include "idlab/io.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace idlab {

inline constexpr const char* kVersion = "0.1.0";

enum class Experiment { Forward, RecoverH, IdentBeta, RecoverFg, GameClassify, FullPipeline };

std::string to_string(Experiment e);
Experiment experiment_from_string(const std::string& s);

struct RunConfig {
  Experiment experiment = Experiment::FullPipeline;
  std::optional<ModelSpec> model;
  std::optional<GameSetup> game;
  DeconvOptions deconv;
  BetaOptions beta;
  std::string y_star = "0";
  double fg_tolerance = 0.05;
  double classify_tolerance = 0.0;
  /// Sample size for simulated CCPs; 0 uses exact quadrature.
  long simulate_n = 0;
  std::uint64_t seed = 0;
  std::filesystem::path out_dir;
};

/// Parses and validates a config document; throws std::invalid_argument on
/// schema violations.
RunConfig parse_config(const Json& doc);
Json config_to_json(const RunConfig& c);

struct RunResult {
  int exit_code = 0;  // 0 ok, 3 flagged or numerical failure
  std::vector<std::string> files;
  std::vector<std::string> failures;
  Json manifest;
};

/// Executes one experiment and writes its artifacts plus manifest.json into
/// config.out_dir. Schema violations propagate as std::invalid_argument.
RunResult run(const RunConfig& config);

}  // namespace idlab
