#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "odegrow/core.hpp"
#include "odegrow/solver.hpp"

namespace odegrow {

/// |lambda| below this uses the series ln x + lambda ln^2 x / 2 + lambda^2 ln^3 x / 6.
inline constexpr double kBoxCoxSeriesThreshold = 1e-5;

/// Box-Cox transform: (x^lambda - 1) / lambda, or ln x at lambda = 0.
/// Throws Error(DomainError) unless x > 0.
[[nodiscard]] double box_cox(double x, double lambda);

/// Closed-form General Bertalanffy volume at time t, with v(0) = v0:
///   (1 + ((v0/v_inf)^lambda - 1) e^{-omega t})^{1/lambda} v_inf,   lambda != 0
///   (v0/v_inf)^{e^{-omega t}} v_inf,                               lambda == 0
/// Throws Error(BlowUp) when the base of the first form is not positive and
/// Error(DomainError) unless v0, v_inf > 0.
[[nodiscard]] double bertalanffy_solution(double t, double v0, double v_inf, double omega, double lambda);

/// One tanh hidden layer, linear output. theta is laid out as
/// W1 (hidden x inputs, row-major), b1, W2 (outputs x hidden, row-major), b2.
/// Throws Error(ShapeMismatch) on a wrong theta or input length.
[[nodiscard]] std::vector<double> mlp_forward(const MlpShape& shape, std::span<const double> theta,
                                              std::span<const double> input);

/// Model right-hand side. For neural models the state is the transformed
/// volume y = ln(v / v_inf) (and the latent u). Throws Error(DomainError)
/// when a Box-Cox model is evaluated at v <= 0 or u <= 0.
[[nodiscard]] OdeState rhs(const ModelSpec& spec, const OdeState& state, const ParamVector& params);

/// Initial ODE state implied by the parameters: v0; (v0, v_inf);
/// ln(v0/v_inf); or (ln(v0/v_inf), 0).
[[nodiscard]] OdeState initial_state(const ModelSpec& spec, std::span<const double> params);

/// The model as an ODE system whose parameter vector is the full model
/// layout of `spec` (entries that only set the initial state have zero
/// Jacobian columns).
[[nodiscard]] std::unique_ptr<OdeSystem> make_system(const ModelSpec& spec);

/// Volumes at `times` (sorted, >= 0, measured from the initial condition).
/// Closed form for the one-dimensional Bertalanffy family and Exponential,
/// RK4 otherwise. Throws Error(BlowUp) or Error(Diverged).
[[nodiscard]] std::vector<double> predict(const ModelSpec& spec, const ParamVector& params,
                                          std::span<const double> times, const SolveConfig& config = {});

/// Non-throwing predict; nullopt on BlowUp, divergence or non-finite volume.
[[nodiscard]] std::optional<std::vector<double>> try_predict(const ModelSpec& spec, std::span<const double> params,
                                                             std::span<const double> times,
                                                             const SolveConfig& config = {});

/// Predicted volumes together with their vector-Jacobian product.
class LinearizedPrediction {
 public:
  using Pullback = std::function<std::vector<double>(std::span<const double>)>;

  LinearizedPrediction(std::vector<double> values, Pullback pullback)
      : values_(std::move(values)), pullback_(std::move(pullback)) {}

  [[nodiscard]] const std::vector<double>& values() const noexcept { return values_; }
  /// sum_i cotangent[i] * d values[i] / d params, over the full parameter layout.
  [[nodiscard]] std::vector<double> pullback(std::span<const double> cotangent) const { return pullback_(cotangent); }

 private:
  std::vector<double> values_;
  Pullback pullback_;
};

/// Values are bitwise equal to try_predict. nullopt on the same failures.
[[nodiscard]] std::optional<LinearizedPrediction> linearize_prediction(const ModelSpec& spec,
                                                                       std::span<const double> params,
                                                                       std::span<const double> times,
                                                                       const SolveConfig& config = {});

}  // namespace odegrow
