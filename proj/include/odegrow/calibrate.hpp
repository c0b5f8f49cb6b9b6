#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "odegrow/core.hpp"
#include "odegrow/solver.hpp"

namespace odegrow {

struct CalibrationConfig {
  double learning_rate = 1e-2;
  std::size_t max_iters = 20000;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  double penalty_kappa = 0.8;
  std::size_t early_stop_patience = 500;
  double early_stop_rel_tol = 1e-9;
  std::uint64_t seed = 0;
  SolveConfig solve;

  /// Learning rate 1e-3 and penalty 0.3 for neural models; 1e-2 and 0.8 otherwise.
  static CalibrationConfig defaults_for(ModelKind kind);

  /// Throws Error(InvalidConfig) on a non-positive learning rate, negative
  /// penalty, zero patience or out-of-range Adam constants.
  void validate() const;
};

/// Measurements withheld from calibration.
struct HoldoutPoints {
  std::vector<double> times;
  std::vector<double> volumes;
};

/// ((v0^2 + v_inf^2) / (2 v0 v_inf))^kappa; at least 1, exactly 1 when v0 == v_inf.
[[nodiscard]] double penalty_factor(double v0, double v_inf, double kappa);

/// Penalized sum of squares on volumes divided by the lesion's maximum
/// volume. Model time zero is the lesion's first measurement. Exponential
/// has no v_inf and no penalty. Returns +infinity when the prediction fails.
[[nodiscard]] double loss(const ModelSpec& spec, const ParamVector& params, const Lesion& calibration,
                          double kappa, const SolveConfig& solve = {});

struct LossGradient {
  double value = 0.0;
  std::vector<double> gradient;
};

/// loss() and its exact gradient over the full parameter layout; nullopt if
/// either is non-finite.
[[nodiscard]] std::optional<LossGradient> loss_and_gradient(const ModelSpec& spec, std::span<const double> params,
                                                            const Lesion& calibration, double kappa,
                                                            const SolveConfig& solve = {});

/// A proposed coordinate update that leaves the open interval (lower, upper)
/// is replaced by the midpoint between the current value and the bound it
/// crossed.
[[nodiscard]] double bounded_step(double value, double proposed, double lower, double upper) noexcept;

/// Starting point: v0 = first volume, v_inf = last volume (moved 1% away
/// from v0 when closer than that), omega = 1 / (t_last - t_first),
/// lambda = 1/3, gamma = 0, network weights ~ U(-0.1, 0.1) from `seed`,
/// biases 0.
[[nodiscard]] ParamVector initialize(const ModelSpec& spec, const Lesion& calibration, std::uint64_t seed);

/// Calibrates `spec` to all points of `calibration` by Adam on the
/// penalized loss and, when given, predicts the holdout points.
///
/// Optimization runs in coordinates where calibration times span [0, 1] and
/// the largest calibration volume is 1; results are mapped back to lesion
/// units. The returned parameters are the best iterate seen. A candidate
/// step with non-finite loss or gradient is pulled halfway back toward the
/// current point (up to 30 times) before being abandoned.
[[nodiscard]] FitResult fit(const ModelSpec& spec, const Lesion& calibration, const CalibrationConfig& config,
                            const HoldoutPoints& holdout = {});

}  // namespace odegrow
