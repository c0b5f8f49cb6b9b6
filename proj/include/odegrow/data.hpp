#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "odegrow/core.hpp"

namespace odegrow {

/// Header of a cohort CSV file.
inline constexpr std::string_view kCohortHeader = "patient_id,time_days,volume";
/// Header of a ground-truth sidecar file.
inline constexpr std::string_view kTruthHeader = "patient_id,param_name,value";

/// Reads `patient_id,time_days,volume` rows. Rows are grouped by patient in
/// order of first appearance and sorted by time within each patient. Throws
/// ParseError (with line number) or LesionError (message names the lesion).
[[nodiscard]] std::vector<Lesion> read_cohort(std::istream& in);
[[nodiscard]] std::vector<Lesion> load_cohort(const std::filesystem::path& path);

/// Shortest decimal text that parses back to exactly `value`.
[[nodiscard]] std::string format_number(double value);

void write_cohort(std::ostream& out, const std::vector<Lesion>& cohort);
void save_cohort(const std::filesystem::path& path, const std::vector<Lesion>& cohort);

struct ParamRange {
  double low = 0.0;
  double high = 0.0;
};

struct SynthConfig {
  ModelKind generator_kind = ModelKind::GeneralBertalanffy;
  std::size_t n_lesions = 100;
  std::size_t min_points = 6;
  std::size_t max_points = 12;
  /// Standard deviation of the log-normal multiplicative noise.
  double noise_sigma = 0.05;
  /// Observation span in whole days; measurement days are distinct.
  ParamRange span_days{120.0, 480.0};
  /// Sampling interval per parameter name ("v0", "v_inf", "omega",
  /// "lambda", "gamma", "w_hidden", "w_output"); defaults fill anything missing.
  std::map<std::string, ParamRange> param_ranges;
  std::uint64_t seed = 0;

  /// Throws Error(InvalidConfig): fewer than 6 points, min > max, negative
  /// noise, empty or inverted ranges, span too short for max_points.
  void validate() const;
};

/// Default sampling interval for one parameter of `kind`.
[[nodiscard]] ParamRange default_param_range(ModelKind kind, const std::string& name);

struct TruthRow {
  std::string patient_id;
  std::string param_name;
  double value = 0.0;
};

struct SyntheticCohort {
  std::vector<Lesion> lesions;
  std::vector<TruthRow> truth;
};

/// Samples parameters, measurement days (first day 0) and noise per
/// lesion; parameter draws whose trajectory fails are redrawn.
[[nodiscard]] SyntheticCohort generate_cohort(const SynthConfig& config);

void write_truth(std::ostream& out, const std::vector<TruthRow>& truth);
void save_truth(const std::filesystem::path& path, const std::vector<TruthRow>& truth);

}  // namespace odegrow
