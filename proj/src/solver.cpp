#include "odegrow/solver.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "odegrow/error.hpp"

namespace odegrow {

OdeState OdeState::from(std::span<const double> components) {
  if (components.size() == 1) return OdeState(components[0]);
  if (components.size() == 2) return OdeState(components[0], components[1]);
  throw Error(ErrorCode::ShapeMismatch, "ODE states have 1 or 2 components, got " + std::to_string(components.size()));
}

StepGrid make_step_grid(double t0, std::span<const double> output_times, const SolveConfig& config) {
  if (config.steps == 0) throw Error(ErrorCode::InvalidConfig, "solver steps must be positive");
  StepGrid grid;
  grid.nodes.push_back(t0);
  if (output_times.empty()) return grid;
  if (!(output_times.front() >= t0)) throw Error(ErrorCode::InvalidConfig, "output times precede the initial time");
  for (std::size_t k = 1; k < output_times.size(); ++k) {
    if (!(output_times[k] >= output_times[k - 1])) throw Error(ErrorCode::InvalidConfig, "output times must be sorted");
  }
  const double span = output_times.back() - t0;
  double start = t0;
  for (double end : output_times) {
    const double length = end - start;
    if (length > 0.0) {
      const auto share = static_cast<std::size_t>(std::llround(static_cast<double>(config.steps) * length / span));
      const std::size_t n = std::max<std::size_t>(2, share);
      for (std::size_t j = 1; j < n; ++j) {
        grid.nodes.push_back(start + length * static_cast<double>(j) / static_cast<double>(n));
      }
      grid.nodes.push_back(end);
      start = end;
    }
    grid.output_index.push_back(grid.nodes.size() - 1);
  }
  return grid;
}

namespace {

bool state_ok(std::span<const double> x, double max_magnitude) {
  for (double v : x) {
    if (!std::isfinite(v) || std::abs(v) > max_magnitude) return false;
  }
  return true;
}

[[noreturn]] void throw_diverged(double t) {
  throw Error(ErrorCode::Diverged, "ODE state became non-finite or exceeded the magnitude limit near t = " +
                                       std::to_string(t));
}

}  // namespace

std::vector<OdeState> integrate(const RhsFunction& rhs, const OdeState& state0, double t0,
                                std::span<const double> output_times, const SolveConfig& config) {
  const StepGrid grid = make_step_grid(t0, output_times, config);
  const std::size_t n = state0.dim();
  std::vector<OdeState> states;
  states.reserve(grid.nodes.size());
  states.push_back(state0);
  if (!state_ok(state0.values(), config.max_state_magnitude)) throw_diverged(t0);

  OdeState x = state0;
  for (std::size_t s = 0; s + 1 < grid.nodes.size(); ++s) {
    const double t = grid.nodes[s];
    const double h = grid.nodes[s + 1] - t;
    const OdeState k1 = rhs(t, x);
    OdeState tmp = x;
    for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * h * k1[i];
    const OdeState k2 = rhs(t + 0.5 * h, tmp);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * h * k2[i];
    const OdeState k3 = rhs(t + 0.5 * h, tmp);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + h * k3[i];
    const OdeState k4 = rhs(t + h, tmp);
    for (std::size_t i = 0; i < n; ++i) x[i] = x[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    if (!state_ok(x.values(), config.max_state_magnitude)) throw_diverged(grid.nodes[s + 1]);
    states.push_back(x);
  }

  std::vector<OdeState> out;
  out.reserve(output_times.size());
  for (std::size_t idx : grid.output_index) out.push_back(states[idx]);
  return out;
}

std::vector<OdeState> integrate(const OdeSystem& system, const OdeState& state0, std::span<const double> params,
                                double t0, std::span<const double> output_times, const SolveConfig& config) {
  if (state0.dim() != system.state_dim() || params.size() != system.param_dim()) {
    throw Error(ErrorCode::ShapeMismatch, "state or parameter size does not match the ODE system");
  }
  auto rhs = [&](double, const OdeState& x) {
    OdeState dx = x;
    system.derivative(x.values(), params, dx.values());
    return dx;
  };
  return integrate(rhs, state0, t0, output_times, config);
}

std::optional<Trajectory> record_trajectory(const OdeSystem& system, const OdeState& state0,
                                            std::span<const double> params, double t0,
                                            std::span<const double> output_times, const SolveConfig& config) {
  const std::size_t n = system.state_dim();
  const std::size_t m = system.param_dim();
  if (state0.dim() != n || params.size() != m) {
    throw Error(ErrorCode::ShapeMismatch, "state or parameter size does not match the ODE system");
  }
  const StepGrid grid = make_step_grid(t0, output_times, config);
  const std::size_t steps = grid.nodes.size() - 1;

  Trajectory traj;
  traj.dim_ = n;
  traj.pdim_ = m;
  traj.h_.resize(steps);
  traj.jx_.reset(new double[steps * 4 * n * n]);
  traj.jp_.reset(new double[steps * 4 * n * m]);
  if (!state_ok(state0.values(), config.max_state_magnitude)) return std::nullopt;

  std::array<std::array<double, OdeState::kMaxDim>, 4> k{};
  std::array<double, OdeState::kMaxDim> tmp{};
  std::vector<OdeState> states;
  states.reserve(grid.nodes.size());
  states.push_back(state0);
  OdeState x = state0;
  for (std::size_t s = 0; s < steps; ++s) {
    const double h = grid.nodes[s + 1] - grid.nodes[s];
    traj.h_[s] = h;
    const double stage_scale[4] = {0.0, 0.5 * h, 0.5 * h, h};
    for (std::size_t stage = 0; stage < 4; ++stage) {
      for (std::size_t i = 0; i < n; ++i) {
        tmp[i] = stage == 0 ? x[i] : x[i] + stage_scale[stage] * k[stage - 1][i];
      }
      const std::size_t slot = s * 4 + stage;
      system.linearize({tmp.data(), n}, params, {k[stage].data(), n}, {traj.jx_.get() + slot * n * n, n * n},
                       {traj.jp_.get() + slot * n * m, n * m});
    }
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = x[i] + h / 6.0 * (k[0][i] + 2.0 * k[1][i] + 2.0 * k[2][i] + k[3][i]);
    }
    if (!state_ok(x.values(), config.max_state_magnitude)) return std::nullopt;
    states.push_back(x);
  }

  traj.outputs_.reserve(output_times.size());
  for (std::size_t idx : grid.output_index) {
    traj.outputs_.push_back(states[idx]);
    traj.output_step_.push_back(idx);
  }
  return traj;
}

Trajectory::Gradient Trajectory::backpropagate(std::span<const double> output_cotangents) const {
  if (output_cotangents.size() != outputs_.size() * dim_) {
    throw Error(ErrorCode::ShapeMismatch, "cotangent length must be outputs x state dimension");
  }
  Gradient grad{std::vector<double>(dim_, 0.0), std::vector<double>(pdim_, 0.0)};
  if (dim_ == 1) {
    sweep<1>(output_cotangents, grad);
  } else {
    sweep<2>(output_cotangents, grad);
  }
  return grad;
}

template <std::size_t N>
void Trajectory::sweep(std::span<const double> output_cotangents, Gradient& grad) const {
  const std::size_t m = pdim_;
  std::array<double, N> adj{};

  // Outputs are sorted by step index, so walk them backwards alongside the steps.
  std::size_t next_output = outputs_.size();
  auto inject = [&](std::size_t state_index) {
    while (next_output > 0 && output_step_[next_output - 1] == state_index) {
      --next_output;
      for (std::size_t i = 0; i < N; ++i) adj[i] += output_cotangents[next_output * N + i];
    }
  };

  const std::size_t steps = h_.size();
  inject(steps);
  std::array<std::array<double, N>, 4> kbar{};
  std::array<double, N> sbar{};
  double* gp = grad.params.data();
  for (std::size_t s = steps; s-- > 0;) {
    const double h = h_[s];
    const double weights[4] = {h / 6.0, h / 3.0, h / 3.0, h / 6.0};
    const double feed[4] = {0.0, 0.5 * h, 0.5 * h, h};
    for (std::size_t stage = 0; stage < 4; ++stage) {
      for (std::size_t i = 0; i < N; ++i) kbar[stage][i] = weights[stage] * adj[i];
    }
    for (std::size_t stage = 4; stage-- > 0;) {
      const std::size_t slot = s * 4 + stage;
      const double* jx = jx_.get() + slot * N * N;
      const double* jp = jp_.get() + slot * N * m;
      for (std::size_t j = 0; j < N; ++j) {
        double acc = 0.0;
        for (std::size_t i = 0; i < N; ++i) acc += jx[i * N + j] * kbar[stage][i];
        sbar[j] = acc;
      }
      for (std::size_t i = 0; i < N; ++i) {
        const double c = kbar[stage][i];
        const double* row = jp + i * m;
        for (std::size_t q = 0; q < m; ++q) gp[q] += row[q] * c;
      }
      for (std::size_t j = 0; j < N; ++j) {
        adj[j] += sbar[j];
        if (stage > 0) kbar[stage - 1][j] += feed[stage] * sbar[j];
      }
    }
    inject(s);
  }
  for (std::size_t i = 0; i < N; ++i) grad.state0[i] = adj[i];
}

Sensitivities integrate_with_sensitivities(const OdeSystem& system, const OdeState& state0,
                                           std::span<const double> params, double t0,
                                           std::span<const double> output_times, const SolveConfig& config) {
  auto traj = record_trajectory(system, state0, params, t0, output_times, config);
  if (!traj) throw Error(ErrorCode::Diverged, "ODE state became non-finite or exceeded the magnitude limit");
  const std::size_t n = traj->state_dim();
  const std::size_t m = traj->param_dim();
  const std::size_t n_out = traj->outputs().size();

  Sensitivities result;
  result.states = traj->outputs();
  result.jacobians.assign(n_out, std::vector<double>(n * (n + m), 0.0));
  std::vector<double> seed(n_out * n, 0.0);
  for (std::size_t k = 0; k < n_out; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      seed[k * n + i] = 1.0;
      const auto g = traj->backpropagate(seed);
      seed[k * n + i] = 0.0;
      auto& row = result.jacobians[k];
      for (std::size_t j = 0; j < n; ++j) row[i * (n + m) + j] = g.state0[j];
      for (std::size_t q = 0; q < m; ++q) row[i * (n + m) + n + q] = g.params[q];
    }
  }
  return result;
}

}  // namespace odegrow
