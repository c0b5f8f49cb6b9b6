#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "odegrow/calibrate.hpp"
#include "odegrow/cli/toml.hpp"
#include "odegrow/core.hpp"
#include "odegrow/evaluate.hpp"

namespace odegrow::cli {

/// Calibration settings that are set only when a config file or flag says so.
struct CalibrationOverrides {
  std::optional<double> learning_rate;
  std::optional<std::size_t> max_iters;
  std::optional<double> adam_beta1;
  std::optional<double> adam_beta2;
  std::optional<double> adam_eps;
  std::optional<double> penalty_kappa;
  std::optional<std::size_t> early_stop_patience;
  std::optional<double> early_stop_rel_tol;

  void apply_to(CalibrationConfig& config) const;
};

/// Settings shared by all commands. File sections:
///   [calibration]          applies to every model
///   [calibration.<model>]  applies to one model, after [calibration]
///   [solver]               steps, max_state_magnitude
///   [bootstrap]            n_resamples, alpha
/// `seed` lives in [calibration]; `threads` may appear at top level or in [run].
/// A [run] section (written by battle manifests) is accepted and otherwise ignored.
struct CliConfig {
  CalibrationOverrides calibration;
  std::map<ModelKind, CalibrationOverrides> per_model;
  /// Command-line overrides; beat every file value.
  CalibrationOverrides flags;
  SolveConfig solve;
  BootstrapConfig bootstrap;
  std::uint64_t seed = 0;
  std::optional<unsigned> threads;

  /// Defaults of the model kind, then [calibration], [calibration.<model>],
  /// flags. The seed field is left at the master seed; callers derive
  /// per-lesion seeds.
  [[nodiscard]] CalibrationConfig calibration_for(ModelKind kind) const;
};

/// Throws ParseError for malformed files and Error(InvalidConfig) for
/// unknown sections or keys and wrongly typed values.
[[nodiscard]] CliConfig config_from_toml(const TomlDocument& doc);
[[nodiscard]] CliConfig load_config(const std::filesystem::path& path);

/// Worker count: flag, then config, then ODEGROW_THREADS, then hardware
/// concurrency. Throws Error(InvalidConfig) on an unparsable variable.
[[nodiscard]] unsigned resolve_threads(std::optional<unsigned> flag, const CliConfig& config);

}  // namespace odegrow::cli
