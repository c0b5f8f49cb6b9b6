#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <vector>

namespace odegrow {

/// State of a one- or two-dimensional ODE.
class OdeState {
 public:
  static constexpr std::size_t kMaxDim = 2;

  OdeState() = default;
  explicit OdeState(double x0) : dim_(1), x_{x0, 0.0} {}
  OdeState(double x0, double x1) : dim_(2), x_{x0, x1} {}
  /// Builds a state from 1 or 2 components.
  static OdeState from(std::span<const double> components);

  [[nodiscard]] std::size_t dim() const noexcept { return dim_; }
  [[nodiscard]] double operator[](std::size_t i) const { return x_[i]; }
  double& operator[](std::size_t i) { return x_[i]; }
  [[nodiscard]] std::span<const double> values() const noexcept { return {x_.data(), dim_}; }
  [[nodiscard]] std::span<double> values() noexcept { return {x_.data(), dim_}; }

  friend bool operator==(const OdeState&, const OdeState&) = default;

 private:
  std::size_t dim_ = 1;
  std::array<double, kMaxDim> x_{};
};

struct SolveConfig {
  /// RK4 steps spread over [t0, last output time]; every output interval
  /// gets at least two steps.
  std::size_t steps = 200;
  double max_state_magnitude = 1e8;
};

/// Autonomous parameterized system dx/dt = f(x, p) with Jacobians.
class OdeSystem {
 public:
  virtual ~OdeSystem() = default;

  [[nodiscard]] virtual std::size_t state_dim() const = 0;
  [[nodiscard]] virtual std::size_t param_dim() const = 0;

  virtual void derivative(std::span<const double> x, std::span<const double> p, std::span<double> dx) const = 0;

  /// Writes dx and the row-major Jacobians jx (dim x dim) and
  /// jp (dim x param_dim).
  virtual void linearize(std::span<const double> x, std::span<const double> p, std::span<double> dx,
                         std::span<double> jx, std::span<double> jp) const = 0;
};

/// Right-hand side as a plain function of (t, state).
using RhsFunction = std::function<OdeState(double t, const OdeState& state)>;

/// Step grid from t0 through every output time. `output_index[k]` is the
/// grid index landing exactly on output_times[k]. Throws
/// Error(InvalidConfig) if the output times are unsorted or precede t0.
struct StepGrid {
  std::vector<double> nodes;
  std::vector<std::size_t> output_index;
};
[[nodiscard]] StepGrid make_step_grid(double t0, std::span<const double> output_times, const SolveConfig& config);

/// Classical RK4 on the exact step grid. Throws Error(Diverged) when a state
/// component becomes non-finite or exceeds config.max_state_magnitude.
[[nodiscard]] std::vector<OdeState> integrate(const RhsFunction& rhs, const OdeState& state0, double t0,
                                              std::span<const double> output_times, const SolveConfig& config = {});

[[nodiscard]] std::vector<OdeState> integrate(const OdeSystem& system, const OdeState& state0,
                                              std::span<const double> params, double t0,
                                              std::span<const double> output_times, const SolveConfig& config = {});

/// Forward RK4 pass that keeps every stage Jacobian for a reverse sweep.
class Trajectory {
 public:
  [[nodiscard]] const std::vector<OdeState>& outputs() const noexcept { return outputs_; }
  [[nodiscard]] std::size_t state_dim() const noexcept { return dim_; }
  [[nodiscard]] std::size_t param_dim() const noexcept { return pdim_; }
  [[nodiscard]] std::size_t steps() const noexcept { return h_.size(); }

  /// Given dL/d(output state) for every output (row-major, n_outputs x dim),
  /// returns dL/d(state0) and dL/d(params) of the discrete trajectory.
  struct Gradient {
    std::vector<double> state0;
    std::vector<double> params;
  };
  [[nodiscard]] Gradient backpropagate(std::span<const double> output_cotangents) const;

 private:
  friend std::optional<Trajectory> record_trajectory(const OdeSystem&, const OdeState&, std::span<const double>,
                                                     double, std::span<const double>, const SolveConfig&);

  std::size_t dim_ = 1;
  std::size_t pdim_ = 0;
  std::vector<OdeState> outputs_;
  std::vector<std::size_t> output_step_;  // number of steps taken before each output
  std::vector<double> h_;
  template <std::size_t N>
  void sweep(std::span<const double> output_cotangents, Gradient& grad) const;

  // Every entry is written by the forward pass, so the buffers skip zeroing.
  std::unique_ptr<double[]> jx_;  // steps x 4 stages x dim x dim
  std::unique_ptr<double[]> jp_;  // steps x 4 stages x dim x pdim
};

/// Non-throwing forward pass; nullopt when the trajectory diverges.
[[nodiscard]] std::optional<Trajectory> record_trajectory(const OdeSystem& system, const OdeState& state0,
                                                          std::span<const double> params, double t0,
                                                          std::span<const double> output_times,
                                                          const SolveConfig& config = {});

struct Sensitivities {
  std::vector<OdeState> states;
  /// Per output time, a row-major dim x (dim + param_dim) matrix: columns are
  /// the initial state components followed by the system parameters.
  std::vector<std::vector<double>> jacobians;
};

/// States and exact derivatives of the discrete trajectory, by one reverse
/// sweep per output component. Throws Error(Diverged).
[[nodiscard]] Sensitivities integrate_with_sensitivities(const OdeSystem& system, const OdeState& state0,
                                                         std::span<const double> params, double t0,
                                                         std::span<const double> output_times,
                                                         const SolveConfig& config = {});

}  // namespace odegrow
