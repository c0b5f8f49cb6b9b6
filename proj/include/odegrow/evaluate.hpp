#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "odegrow/calibrate.hpp"
#include "odegrow/core.hpp"

namespace odegrow {

/// Lesions with fewer measurements are not admitted to holdout evaluation.
inline constexpr std::size_t kMinMeasurements = 6;
inline constexpr std::size_t kHoldoutSize = 2;

struct HoldoutSplit {
  Lesion calibration;
  HoldoutPoints holdout;
};

/// Last two measurements become the holdout. Throws
/// Error(TooFewMeasurements) below six measurements.
[[nodiscard]] HoldoutSplit split_holdout(const Lesion& lesion);

/// Mean absolute holdout error divided by the fit's volume scale. Throws
/// Error(Diverged) for a diverged fit or one without holdout predictions.
[[nodiscard]] double holdout_mae(const FitResult& fit, const HoldoutPoints& holdout);

struct Interval {
  double low = 0.0;
  double high = 0.0;
};

/// Percentile bootstrap interval for the mean. Quantiles interpolate
/// linearly between order statistics. Throws Error(EmptyInput).
[[nodiscard]] Interval bootstrap_ci(std::span<const double> differences, std::size_t n_resamples = 2000,
                                    double alpha = 0.05, std::uint64_t seed = 0);

enum class Verdict { WinA, WinB, Draw };

[[nodiscard]] std::string_view to_string(Verdict verdict) noexcept;

/// Interval of mean(errA - errB): below zero favours A, above zero favours B.
[[nodiscard]] Verdict verdict_for(const Interval& interval) noexcept;

struct Matchup {
  Interval interval;
  Verdict verdict = Verdict::Draw;
};

struct BootstrapConfig {
  std::size_t n_resamples = 2000;
  double alpha = 0.05;
};

struct BattleConfig {
  /// One entry per model, same order as the specs passed to battle().
  std::vector<CalibrationConfig> calibration;
  BootstrapConfig bootstrap;
  std::uint64_t master_seed = 0;
  /// 0 means hardware concurrency.
  unsigned threads = 1;
};

/// BattleConfig with CalibrationConfig::defaults_for each spec.
[[nodiscard]] BattleConfig default_battle_config(std::span<const ModelSpec> specs);

struct BattleReport {
  std::vector<ModelSpec> models;
  std::vector<double> mean_abs_error;
  /// Lesions used, in cohort order.
  std::vector<std::string> lesion_ids;
  /// lesion x model normalized holdout MAE.
  std::vector<std::vector<double>> per_lesion_errors;
  /// models x models, row-major; entry (a, b) compares model a against b.
  std::vector<Matchup> pairwise;
  std::size_t n_lesions_used = 0;
  /// Admitted lesions dropped because some model diverged.
  std::size_t n_discarded = 0;
  /// Lesions with fewer than kMinMeasurements points.
  std::size_t n_rejected = 0;
  std::vector<std::string> discarded_ids;

  [[nodiscard]] const Matchup& matchup(std::size_t a, std::size_t b) const { return pairwise[a * models.size() + b]; }
  /// Model indices sorted by mean error (ties keep input order).
  [[nodiscard]] std::vector<std::size_t> ranking() const;
};

/// Order-independent seed for one (lesion, model) fit.
[[nodiscard]] std::uint64_t derive_seed(std::uint64_t master_seed, std::string_view lesion_id, ModelKind kind) noexcept;

/// All pairwise bootstrap verdicts for a lesion x model error matrix. Pair
/// (a, b) with a < b is resampled; (b, a) is its exact mirror.
[[nodiscard]] std::vector<Matchup> compare_models(const std::vector<std::vector<double>>& per_lesion_errors,
                                                  std::span<const ModelSpec> models, const BootstrapConfig& config,
                                                  std::uint64_t master_seed);

/// Thrown by battle() when no lesion survives admission and divergence discards.
class NoUsableLesions : public Error {
 public:
  NoUsableLesions(std::size_t rejected, std::size_t discarded);
  [[nodiscard]] std::size_t n_rejected() const noexcept { return rejected_; }
  [[nodiscard]] std::size_t n_discarded() const noexcept { return discarded_; }

 private:
  std::size_t rejected_;
  std::size_t discarded_;
};

/// Fits every model to every admitted lesion, drops lesions where any model
/// diverged, and compares models on the remaining paired holdout errors.
[[nodiscard]] BattleReport battle(std::span<const Lesion> cohort, std::span<const ModelSpec> specs,
                                  const BattleConfig& config);

}  // namespace odegrow
