#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "roughhedge/asymptotics/asymptotics.hpp"
#include "roughhedge/hedger/hedger.hpp"
#include "roughhedge/pricer/pricer.hpp"
#include "roughhedge/volsim/model.hpp"
#include "roughhedge/volsim/sampler.hpp"

namespace roughhedge::labcli {

inline constexpr int kSchemaVersion = 1;

/// A scheme entry of the config. An empty dcal means the theoretical value
/// D K / (sqrt(2 pi) sigma_bar^2).
struct SchemeConfig {
  SchemeKind kind = SchemeKind::BS;
  std::optional<double> dcal;
};

struct SurfaceConfig {
  std::vector<double> theta;
  std::vector<double> d_minus;
  /// Optional (tau, moneyness) grid for the normalized maturity stdev surface.
  std::vector<double> tau;
  std::vector<double> moneyness;
};

struct CalibrationConfig {
  SchemeKind scheme = SchemeKind::BS;
  DcalSearch search;
};

struct PredictConfig {
  bool monte_carlo = false;
};

struct ExperimentConfig {
  VolModel model;
  GridSpec grid;
  SamplerOptions sampler;
  OptionSpec option;
  std::vector<SchemeConfig> schemes;
  long n_paths = 10000;
  std::uint64_t seed = 1;
  std::vector<double> moneyness_grid{0.8, 0.9, 1.0, 1.1, 1.2};
  std::vector<double> exercise_times{1.0};
  std::string output_dir = "out";
  int stride = 1;
  SurfaceConfig surfaces;
  CalibrationConfig calibration;
  PredictConfig predict;

  /// Canonical JSON of the effective configuration (after overrides).
  nlohmann::json canonical() const;

  /// FNV-1a of canonical().dump(), as 16 hex digits.
  std::string hash() const;
};

/// Parses and validates a config. Unknown keys and type mismatches throw
/// ValidationError naming the offending key path.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& file);

/// JSON schema describing accepted configs.
nlohmann::json config_schema();

struct RunOptions {
  int threads = 1;
  std::optional<std::string> out_dir;
};

/// Each command writes into the output directory under a lockfile and
/// returns the JSON summary it wrote.
nlohmann::json cmd_simulate(const ExperimentConfig& cfg, const RunOptions& run);
nlohmann::json cmd_surfaces(const ExperimentConfig& cfg, const RunOptions& run);
nlohmann::json cmd_hedge(const ExperimentConfig& cfg, const RunOptions& run);
nlohmann::json cmd_calibrate(const ExperimentConfig& cfg, const RunOptions& run);
nlohmann::json cmd_predict(const ExperimentConfig& cfg, const RunOptions& run);

/// JSON summary of one outcome: scheme, dcal, exercise_time, moneyness,
/// mean, stdev, stderr, n_paths, seed, initiation_value, mark.
nlohmann::json outcome_summary(const HedgeOutcome& outcome);

/// Exclusive lock on an output directory, released on destruction. Throws
/// ValidationError when another run holds it.
class DirectoryLock {
 public:
  explicit DirectoryLock(const std::filesystem::path& dir);
  ~DirectoryLock();
  DirectoryLock(const DirectoryLock&) = delete;
  DirectoryLock& operator=(const DirectoryLock&) = delete;

 private:
  std::filesystem::path file_;
};

/// Exit code for an exception: 2 for validation and domain errors, 3 for
/// numerical failures, 1 otherwise.
int exit_code_for(const std::exception& e);

}  // namespace roughhedge::labcli
