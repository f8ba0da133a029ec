#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mvsim/analysis.hpp"

namespace mvsim {

/// Invalid configuration; `line` is 1-based (0 when not tied to a line).
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::size_t line, const std::string& message);
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

struct ExperimentConfig {
  std::string name;
  std::string model;
  ModelParams params;
  std::string functional;  // empty when the estimator takes none
  EstimatorKind estimator = EstimatorKind::kWeakSemigroup;
  double horizon = 1.0;
  RateAxis axis = RateAxis::kMesh;
  std::vector<std::size_t> values;
  std::size_t fixed = 0;
  ReplicationPolicy replications;
  std::uint64_t seed = 1;
  std::string output;
  std::size_t dimension = 1;
  ReferenceMode reference;
  std::size_t finest_steps = 0;
  std::optional<double> t_eval;
  double noise_gate = 0.2;
  double slope_min = -1e300;
  double slope_max = 1e300;
};

/// Parses and validates a YAML config. Unknown keys, wrong types and
/// inconsistent sweeps raise ConfigError with the offending line.
ExperimentConfig parse_config(const std::filesystem::path& path);
ExperimentConfig parse_config_text(const std::string& text);

/// Fully resolved config (every default made explicit).
nlohmann::ordered_json to_json(const ExperimentConfig& config);

SweepDesign make_design(const ExperimentConfig& config);

enum class Verdict { kPass, kFail, kNoisy };
std::string to_string(Verdict verdict);

struct RunOptions {
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> output;
  int workers = 0;  // 0: hardware parallelism
  bool quiet = false;
};

struct ExperimentOutcome {
  int exit_code = 0;
  Verdict verdict = Verdict::kFail;
  std::optional<RateFit> fit;
  SweepResult sweep;
  std::string message;
  std::filesystem::path output_dir;
};

/// Runs the experiment and writes points.csv, points.json, ratefit.json,
/// summary.txt and plotdata.csv. Exit codes: 0 PASS, 1 FAIL, 3 integration
/// error, 4 noise budget exhausted (NOISY).
ExperimentOutcome run_experiment(const ExperimentConfig& config, const RunOptions& options = {});

/// Environment variable naming the default output root.
inline constexpr const char* kOutputDirEnv = "MVSIM_OUTPUT_DIR";

}  // namespace mvsim
