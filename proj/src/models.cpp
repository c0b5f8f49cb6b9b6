#include "odegrow/models.hpp"

#include <cmath>
#include <memory>
#include <string>

#include "model_kernels.hpp"

namespace odegrow {

double box_cox(double x, double lambda) {
  if (!(x > 0.0)) throw Error(ErrorCode::DomainError, "Box-Cox transform needs x > 0, got " + std::to_string(x));
  return kernels::box_cox(x, lambda);
}

double bertalanffy_solution(double t, double v0, double v_inf, double omega, double lambda) {
  if (!(v0 > 0.0) || !(v_inf > 0.0)) {
    throw Error(ErrorCode::DomainError, "Bertalanffy solution needs v0 > 0 and v_inf > 0");
  }
  const double v = kernels::bertalanffy(t, v0, v_inf, omega, lambda);
  if (!std::isfinite(v)) {
    throw Error(ErrorCode::BlowUp, "Bertalanffy solution blows up before t = " + std::to_string(t));
  }
  return v;
}

std::vector<double> mlp_forward(const MlpShape& shape, std::span<const double> theta, std::span<const double> input) {
  if (theta.size() != shape.parameter_count()) {
    throw Error(ErrorCode::ShapeMismatch, "network expects " + std::to_string(shape.parameter_count()) +
                                              " weights and biases, got " + std::to_string(theta.size()));
  }
  if (input.size() != shape.inputs) {
    throw Error(ErrorCode::ShapeMismatch, "network expects " + std::to_string(shape.inputs) + " inputs, got " +
                                              std::to_string(input.size()));
  }
  if (shape.hidden > kernels::kMaxHidden) throw Error(ErrorCode::ShapeMismatch, "hidden layer too wide");
  std::vector<double> out(shape.outputs);
  kernels::mlp(shape, theta.data(), input.data(), out.data());
  return out;
}

std::unique_ptr<OdeSystem> make_system(const ModelSpec& spec) {
  switch (spec.kind()) {
    case ModelKind::Exponential:
      return std::make_unique<kernels::ExponentialSystem>();
    case ModelKind::Logistic:
    case ModelKind::ClassicalBertalanffy:
    case ModelKind::ClassicalGompertz:
      return std::make_unique<kernels::BertalanffySystem<3>>(spec.lambda_fixed());
    case ModelKind::GeneralBertalanffy:
      return std::make_unique<kernels::BertalanffySystem<4>>(std::nullopt);
    case ModelKind::Bertalanffy2D:
      return std::make_unique<kernels::Bertalanffy2DSystem>();
    case ModelKind::Neural1D:
      return std::make_unique<kernels::NeuralSystem<1, 12>>(*spec.mlp_shape());
    case ModelKind::Neural2D:
      return std::make_unique<kernels::NeuralSystem<2, 14>>(*spec.mlp_shape());
  }
  throw Error(ErrorCode::UnknownModel, "unknown model kind");
}

namespace {

void check_params(const ModelSpec& spec, std::span<const double> params) {
  if (params.size() != spec.parameter_count()) {
    throw Error(ErrorCode::ShapeMismatch, std::string(to_string(spec.kind())) + " expects " +
                                              std::to_string(spec.parameter_count()) + " parameters, got " +
                                              std::to_string(params.size()));
  }
}

bool all_positive_finite(std::span<const double> values) {
  for (double v : values) {
    if (!std::isfinite(v) || !(v > 0.0)) return false;
  }
  return true;
}

template <std::size_t NP>
std::optional<std::vector<double>> closed_form_values(const ModelSpec& spec, std::span<const double> params,
                                                      std::span<const double> times) {
  std::array<double, NP> p{};
  for (std::size_t i = 0; i < NP; ++i) p[i] = params[i];
  std::vector<double> out(times.size());
  for (std::size_t k = 0; k < times.size(); ++k) out[k] = kernels::closed_form(spec, p, times[k]);
  if (!all_positive_finite(out)) return std::nullopt;
  return out;
}

template <std::size_t NP>
std::optional<LinearizedPrediction> closed_form_linearization(const ModelSpec& spec, std::span<const double> params,
                                                              std::span<const double> times) {
  using D = Dual<NP>;
  std::array<D, NP> p{};
  for (std::size_t i = 0; i < NP; ++i) p[i] = D(params[i], i);
  std::vector<double> values(times.size());
  auto jacobian = std::make_shared<std::vector<double>>(times.size() * NP);
  for (std::size_t k = 0; k < times.size(); ++k) {
    const D v = kernels::closed_form(spec, p, times[k]);
    values[k] = v.value;
    for (std::size_t q = 0; q < NP; ++q) (*jacobian)[k * NP + q] = v.grad[q];
  }
  if (!all_positive_finite(values)) return std::nullopt;
  for (double g : *jacobian) {
    if (!std::isfinite(g)) return std::nullopt;
  }
  const std::size_t n = times.size();
  return LinearizedPrediction(std::move(values), [jacobian, n](std::span<const double> cot) {
    std::vector<double> grad(NP, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
      for (std::size_t q = 0; q < NP; ++q) grad[q] += cot[k] * (*jacobian)[k * NP + q];
    }
    return grad;
  });
}

// Trajectory outputs mapped back to volumes.
std::vector<double> output_volumes(const ModelSpec& spec, std::span<const double> params,
                                   const std::vector<OdeState>& states) {
  std::vector<double> out(states.size());
  const bool neural = is_neural(spec.kind());
  for (std::size_t k = 0; k < states.size(); ++k) {
    out[k] = neural ? params[param::kVInf] * std::exp(states[k][0]) : states[k][0];
  }
  return out;
}

}  // namespace

OdeState initial_state(const ModelSpec& spec, std::span<const double> params) {
  check_params(spec, params);
  switch (spec.kind()) {
    case ModelKind::Bertalanffy2D:
      return OdeState(params[param::kV0], params[param::kVInf]);
    case ModelKind::Neural1D:
      return OdeState(std::log(params[param::kV0] / params[param::kVInf]));
    case ModelKind::Neural2D:
      return OdeState(std::log(params[param::kV0] / params[param::kVInf]), 0.0);
    default:
      return OdeState(params[param::kV0]);
  }
}

OdeState rhs(const ModelSpec& spec, const OdeState& state, const ParamVector& params) {
  check_params(spec, params.values());
  if (state.dim() != spec.state_dim()) {
    throw Error(ErrorCode::ShapeMismatch, std::string(to_string(spec.kind())) + " has state dimension " +
                                              std::to_string(spec.state_dim()));
  }
  if (spec.kind() != ModelKind::Exponential && !is_neural(spec.kind())) {
    for (double component : state.values()) {
      if (!(component > 0.0)) throw Error(ErrorCode::DomainError, "Box-Cox models need positive state components");
    }
  }
  const auto system = make_system(spec);
  OdeState dx = state;
  system->derivative(state.values(), params.values(), dx.values());
  return dx;
}

std::optional<std::vector<double>> try_predict(const ModelSpec& spec, std::span<const double> params,
                                               std::span<const double> times, const SolveConfig& config) {
  check_params(spec, params);
  switch (spec.kind()) {
    case ModelKind::Exponential: return closed_form_values<2>(spec, params, times);
    case ModelKind::Logistic:
    case ModelKind::ClassicalBertalanffy:
    case ModelKind::ClassicalGompertz: return closed_form_values<3>(spec, params, times);
    case ModelKind::GeneralBertalanffy: return closed_form_values<4>(spec, params, times);
    default: break;
  }
  const auto system = make_system(spec);
  std::vector<OdeState> states;
  try {
    states = integrate(*system, initial_state(spec, params), params, 0.0, times, config);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::Diverged) return std::nullopt;
    throw;
  }
  auto out = output_volumes(spec, params, states);
  if (!all_positive_finite(out)) return std::nullopt;
  return out;
}

std::vector<double> predict(const ModelSpec& spec, const ParamVector& params, std::span<const double> times,
                            const SolveConfig& config) {
  auto out = try_predict(spec, params.values(), times, config);
  if (!out) {
    if (spec.uses_solver()) throw Error(ErrorCode::Diverged, std::string(to_string(spec.kind())) + " prediction diverged");
    throw Error(ErrorCode::BlowUp, std::string(to_string(spec.kind())) + " solution blows up within the requested times");
  }
  return *out;
}

std::optional<LinearizedPrediction> linearize_prediction(const ModelSpec& spec, std::span<const double> params,
                                                         std::span<const double> times, const SolveConfig& config) {
  check_params(spec, params);
  switch (spec.kind()) {
    case ModelKind::Exponential: return closed_form_linearization<2>(spec, params, times);
    case ModelKind::Logistic:
    case ModelKind::ClassicalBertalanffy:
    case ModelKind::ClassicalGompertz: return closed_form_linearization<3>(spec, params, times);
    case ModelKind::GeneralBertalanffy: return closed_form_linearization<4>(spec, params, times);
    default: break;
  }

  const auto system = make_system(spec);
  auto traj = record_trajectory(*system, initial_state(spec, params), params, 0.0, times, config);
  if (!traj) return std::nullopt;
  auto values = output_volumes(spec, params, traj->outputs());
  if (!all_positive_finite(values)) return std::nullopt;

  auto shared = std::make_shared<Trajectory>(std::move(*traj));
  const std::vector<double> p(params.begin(), params.end());
  const bool neural = is_neural(spec.kind());
  return LinearizedPrediction(values, [shared, p, values, neural](std::span<const double> cot) {
    const std::size_t n = shared->state_dim();
    std::vector<double> state_cot(values.size() * n, 0.0);
    double v_inf_direct = 0.0;
    for (std::size_t k = 0; k < values.size(); ++k) {
      // Neural volume is v_inf * exp(y): dv/dy = v, dv/dv_inf = v / v_inf.
      state_cot[k * n] = neural ? cot[k] * values[k] : cot[k];
      if (neural) v_inf_direct += cot[k] * values[k] / p[param::kVInf];
    }
    auto g = shared->backpropagate(state_cot);
    std::vector<double> grad = std::move(g.params);
    if (neural) {
      grad[param::kV0] += g.state0[0] / p[param::kV0];
      grad[param::kVInf] += v_inf_direct - g.state0[0] / p[param::kVInf];
    } else {
      grad[param::kV0] += g.state0[0];
      grad[param::kVInf] += g.state0[1];
    }
    return grad;
  });
}

}  // namespace odegrow
