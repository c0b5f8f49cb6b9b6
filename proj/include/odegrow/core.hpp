#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "odegrow/error.hpp"

namespace odegrow {

/// One patient's measured time-volume series. Immutable once built.
///
/// Times are days (treated as raw reals), volumes are in any consistent
/// unit. Construction enforces: equal lengths, at least two points, strictly
/// increasing times, finite positive volumes.
class Lesion {
 public:
  /// Validates and builds a lesion. Throws LesionError naming the offending
  /// index (NonMonotoneTimes, NonPositiveVolume, LengthMismatch, TooFewPoints).
  static Lesion validate(std::string id, std::vector<double> times, std::vector<double> volumes);

  [[nodiscard]] const std::string& id() const noexcept { return id_; }
  [[nodiscard]] std::span<const double> times() const noexcept { return times_; }
  [[nodiscard]] std::span<const double> volumes() const noexcept { return volumes_; }
  [[nodiscard]] std::size_t size() const noexcept { return times_.size(); }

  friend bool operator==(const Lesion&, const Lesion&) = default;

 private:
  Lesion(std::string id, std::vector<double> times, std::vector<double> volumes)
      : id_(std::move(id)), times_(std::move(times)), volumes_(std::move(volumes)) {}

  std::string id_;
  std::vector<double> times_;
  std::vector<double> volumes_;
};

/// Free-function spelling of Lesion::validate.
inline Lesion validate_lesion(std::string id, std::vector<double> times, std::vector<double> volumes) {
  return Lesion::validate(std::move(id), std::move(times), std::move(volumes));
}

enum class ModelKind {
  Exponential,
  Logistic,
  ClassicalBertalanffy,
  ClassicalGompertz,
  GeneralBertalanffy,
  Bertalanffy2D,
  Neural1D,
  Neural2D,
};

inline constexpr std::array<ModelKind, 8> kAllModelKinds = {
    ModelKind::Exponential,       ModelKind::Logistic,          ModelKind::ClassicalBertalanffy,
    ModelKind::ClassicalGompertz, ModelKind::GeneralBertalanffy, ModelKind::Bertalanffy2D,
    ModelKind::Neural1D,          ModelKind::Neural2D,
};

/// Command-line identifier: exponential, logistic, classical_bertalanffy,
/// gompertz, bertalanffy, bertalanffy2, neural, neural2.
[[nodiscard]] std::string_view to_string(ModelKind kind) noexcept;

/// Human-readable table label, e.g. "General Bertalanffy".
[[nodiscard]] std::string_view display_name(ModelKind kind) noexcept;

[[nodiscard]] std::optional<ModelKind> parse_model_kind(std::string_view name) noexcept;

/// Comma-separated list of every valid identifier, for error messages.
[[nodiscard]] std::string model_kind_list();

[[nodiscard]] constexpr bool is_neural(ModelKind kind) noexcept {
  return kind == ModelKind::Neural1D || kind == ModelKind::Neural2D;
}

/// Map from network input to hidden tanh layer to linear output layer.
struct MlpShape {
  std::size_t inputs = 1;
  std::size_t hidden = 1;
  std::size_t outputs = 1;

  [[nodiscard]] constexpr std::size_t parameter_count() const noexcept {
    return hidden * inputs + hidden + outputs * hidden + outputs;
  }
  friend constexpr bool operator==(const MlpShape&, const MlpShape&) = default;
};

enum class VolumeTransform { Log };

/// Fixed structure of a model: pinned Box-Cox exponent, network shape and
/// the layout of the calibratable parameter vector.
///
/// Layouts (index order):
///   Exponential            v0, omega
///   Logistic / Classical*  v0, v_inf, omega
///   GeneralBertalanffy     v0, v_inf, omega, lambda
///   Bertalanffy2D          v0, v_inf, omega, lambda, gamma
///   Neural1D / Neural2D    v0, v_inf, w[0] ... w[n-1]
class ModelSpec {
 public:
  static ModelSpec of(ModelKind kind);

  [[nodiscard]] ModelKind kind() const noexcept { return kind_; }
  [[nodiscard]] const std::optional<double>& lambda_fixed() const noexcept { return lambda_fixed_; }
  [[nodiscard]] const std::optional<MlpShape>& mlp_shape() const noexcept { return mlp_shape_; }
  [[nodiscard]] VolumeTransform transform() const noexcept { return transform_; }

  [[nodiscard]] std::size_t state_dim() const noexcept;
  [[nodiscard]] std::size_t parameter_count() const noexcept;
  [[nodiscard]] std::vector<std::string> parameter_names() const;
  [[nodiscard]] bool has_v_inf() const noexcept { return kind_ != ModelKind::Exponential; }
  /// Whether predictions come from numeric integration rather than a closed form.
  [[nodiscard]] bool uses_solver() const noexcept;

  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;

 private:
  ModelSpec() = default;

  ModelKind kind_ = ModelKind::Exponential;
  std::optional<double> lambda_fixed_;
  std::optional<MlpShape> mlp_shape_;
  VolumeTransform transform_ = VolumeTransform::Log;
};

namespace param {
inline constexpr std::size_t kV0 = 0;
inline constexpr std::size_t kVInf = 1;
inline constexpr std::size_t kOmega = 2;
inline constexpr std::size_t kLambda = 3;
inline constexpr std::size_t kGamma = 4;
inline constexpr std::size_t kExponentialOmega = 1;
inline constexpr std::size_t kNetworkOffset = 2;
}  // namespace param

/// Flat calibratable parameters with open per-entry bounds
/// (lower < value < upper, either side possibly infinite).
class ParamVector {
 public:
  ParamVector() = default;
  /// Throws Error(InvalidConfig) on length mismatch, empty or inverted
  /// bounds, or a value outside its open interval.
  ParamVector(std::vector<std::string> names, std::vector<double> values, std::vector<double> lower,
              std::vector<double> upper);

  /// Default names and bounds for `spec`, with the given values.
  static ParamVector for_spec(const ModelSpec& spec, std::vector<double> values);

  [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }
  [[nodiscard]] std::span<const double> values() const noexcept { return values_; }
  [[nodiscard]] std::span<const double> lower_bounds() const noexcept { return lower_; }
  [[nodiscard]] std::span<const double> upper_bounds() const noexcept { return upper_; }
  [[nodiscard]] const std::vector<std::string>& names() const noexcept { return names_; }
  [[nodiscard]] double operator[](std::size_t i) const { return values_[i]; }

  /// Same names and bounds, new values (validated).
  [[nodiscard]] ParamVector with_values(std::vector<double> values) const;

  friend bool operator==(const ParamVector&, const ParamVector&) = default;

 private:
  std::vector<std::string> names_;
  std::vector<double> values_;
  std::vector<double> lower_;
  std::vector<double> upper_;
};

enum class FitStatus {
  /// Best loss stopped improving (patience rule) or reached zero.
  Converged,
  /// Iteration budget ran out while the loss was still improving.
  EarlyStopped,
  /// Non-finite loss from the start, or non-finite gradient at the best point.
  Diverged,
};

[[nodiscard]] std::string_view to_string(FitStatus status) noexcept;

struct FitResult {
  ModelSpec spec = ModelSpec::of(ModelKind::Exponential);
  /// Calibrated parameters in the lesion's own units, time origin at
  /// `time_origin` (the first calibration time).
  ParamVector params;
  /// Best-so-far penalized loss after each iteration (normalized volumes).
  std::vector<double> loss_trace;
  FitStatus status = FitStatus::Diverged;
  std::size_t iterations = 0;
  double time_origin = 0.0;
  /// Maximum calibration volume; losses and MAEs are reported in this unit.
  double volume_scale = 1.0;
  std::vector<double> holdout_times;
  std::vector<double> holdout_predictions;
  /// |prediction - measured| in lesion units.
  std::vector<double> holdout_abs_errors;

  [[nodiscard]] double final_loss() const noexcept;
};

}  // namespace odegrow
