#include "odegrow/calibrate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "odegrow/models.hpp"

namespace odegrow {

CalibrationConfig CalibrationConfig::defaults_for(ModelKind kind) {
  CalibrationConfig config;
  if (is_neural(kind)) {
    config.learning_rate = 1e-3;
    config.penalty_kappa = 0.3;
  }
  return config;
}

void CalibrationConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::InvalidConfig, what); };
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) fail("learning_rate must be positive");
  if (!(penalty_kappa >= 0.0) || !std::isfinite(penalty_kappa)) fail("penalty must be non-negative");
  if (early_stop_patience < 1) fail("patience must be at least 1");
  if (!(early_stop_rel_tol >= 0.0)) fail("rel_tol must be non-negative");
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0) || !(adam_beta2 >= 0.0 && adam_beta2 < 1.0)) {
    fail("Adam betas must lie in [0, 1)");
  }
  if (!(adam_eps > 0.0)) fail("Adam epsilon must be positive");
  if (solve.steps < 1) fail("solver steps must be positive");
  if (!(solve.max_state_magnitude > 0.0)) fail("max_state_magnitude must be positive");
}

double penalty_factor(double v0, double v_inf, double kappa) {
  return std::pow((v0 * v0 + v_inf * v_inf) / (2.0 * v0 * v_inf), kappa);
}

namespace {

std::vector<double> relative_times(const Lesion& lesion) {
  std::vector<double> out(lesion.size());
  const double origin = lesion.times()[0];
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = lesion.times()[i] - origin;
  return out;
}

double max_volume(const Lesion& lesion) {
  return *std::max_element(lesion.volumes().begin(), lesion.volumes().end());
}

}  // namespace

double loss(const ModelSpec& spec, const ParamVector& params, const Lesion& calibration, double kappa,
            const SolveConfig& solve) {
  const auto times = relative_times(calibration);
  const auto predicted = try_predict(spec, params.values(), times, solve);
  if (!predicted) return std::numeric_limits<double>::infinity();
  const double scale = max_volume(calibration);
  double sse = 0.0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double r = ((*predicted)[i] - calibration.volumes()[i]) / scale;
    sse += r * r;
  }
  if (!spec.has_v_inf()) return sse;
  const double value = penalty_factor(params[param::kV0], params[param::kVInf], kappa) * sse;
  return std::isfinite(value) ? value : std::numeric_limits<double>::infinity();
}

std::optional<LossGradient> loss_and_gradient(const ModelSpec& spec, std::span<const double> params,
                                              const Lesion& calibration, double kappa, const SolveConfig& solve) {
  const auto times = relative_times(calibration);
  const auto lin = linearize_prediction(spec, params, times, solve);
  if (!lin) return std::nullopt;
  const double scale = max_volume(calibration);
  double sse = 0.0;
  std::vector<double> cot(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double r = (lin->values()[i] - calibration.volumes()[i]) / scale;
    sse += r * r;
    cot[i] = 2.0 * r / scale;
  }
  LossGradient out{sse, lin->pullback(cot)};
  if (spec.has_v_inf()) {
    const double v0 = params[param::kV0];
    const double vi = params[param::kVInf];
    const double q = (v0 * v0 + vi * vi) / (2.0 * v0 * vi);
    const double pen = penalty_factor(v0, vi, kappa);
    // d pen / d q = kappa q^(kappa - 1) = kappa pen / q
    const double dpen_dq = kappa * pen / q;
    const double dq_dv0 = (v0 * v0 - vi * vi) / (2.0 * v0 * v0 * vi);
    const double dq_dvi = (vi * vi - v0 * v0) / (2.0 * vi * vi * v0);
    out.value = pen * sse;
    for (double& g : out.gradient) g *= pen;
    out.gradient[param::kV0] += sse * dpen_dq * dq_dv0;
    out.gradient[param::kVInf] += sse * dpen_dq * dq_dvi;
  }
  if (!std::isfinite(out.value)) return std::nullopt;
  for (double g : out.gradient) {
    if (!std::isfinite(g)) return std::nullopt;
  }
  return out;
}

double bounded_step(double value, double proposed, double lower, double upper) noexcept {
  if (proposed > lower && proposed < upper) return proposed;
  double halfway = value;  // NaN proposal stays put
  if (proposed <= lower) halfway = value + 0.5 * (lower - value);
  if (proposed >= upper) halfway = value + 0.5 * (upper - value);
  // Within one ulp of the bound the midpoint rounds onto it.
  return (halfway > lower && halfway < upper) ? halfway : value;
}

ParamVector initialize(const ModelSpec& spec, const Lesion& calibration, std::uint64_t seed) {
  const auto volumes = calibration.volumes();
  const auto times = calibration.times();
  const double v0 = volumes.front();
  const double omega = 1.0 / (times.back() - times.front());
  double v_inf = volumes.back();
  if (std::abs(v_inf - v0) < 0.01 * v0) v_inf = v_inf >= v0 ? 1.01 * v0 : 0.99 * v0;

  std::vector<double> values;
  switch (spec.kind()) {
    case ModelKind::Exponential:
      values = {v0, omega};
      break;
    case ModelKind::Logistic:
    case ModelKind::ClassicalBertalanffy:
    case ModelKind::ClassicalGompertz:
      values = {v0, v_inf, omega};
      break;
    case ModelKind::GeneralBertalanffy:
      values = {v0, v_inf, omega, 1.0 / 3.0};
      break;
    case ModelKind::Bertalanffy2D:
      values = {v0, v_inf, omega, 1.0 / 3.0, 0.0};
      break;
    case ModelKind::Neural1D:
    case ModelKind::Neural2D: {
      const MlpShape shape = *spec.mlp_shape();
      values = {v0, v_inf};
      std::mt19937_64 rng(seed);
      std::uniform_real_distribution<double> weight(-0.1, 0.1);
      auto push_weights = [&](std::size_t n) {
        for (std::size_t i = 0; i < n; ++i) values.push_back(weight(rng));
      };
      push_weights(shape.hidden * shape.inputs);
      values.insert(values.end(), shape.hidden, 0.0);
      push_weights(shape.outputs * shape.hidden);
      values.insert(values.end(), shape.outputs, 0.0);
      break;
    }
  }
  return ParamVector::for_spec(spec, std::move(values));
}

namespace {

// Maps normalized-coordinate parameters (time span 1, max volume 1) back
// to lesion units.
std::vector<double> to_lesion_units(const ModelSpec& spec, std::vector<double> x, double time_span, double scale) {
  x[param::kV0] *= scale;
  switch (spec.kind()) {
    case ModelKind::Exponential:
      x[param::kExponentialOmega] /= time_span;
      break;
    case ModelKind::Neural1D:
    case ModelKind::Neural2D: {
      x[param::kVInf] *= scale;
      // dy/dt scales with 1/time_span, and the output layer is linear.
      const MlpShape shape = *spec.mlp_shape();
      const std::size_t output_layer = param::kNetworkOffset + shape.hidden * shape.inputs + shape.hidden;
      for (std::size_t i = output_layer; i < x.size(); ++i) x[i] /= time_span;
      break;
    }
    default:
      x[param::kVInf] *= scale;
      x[param::kOmega] /= time_span;
      break;
  }
  return x;
}

constexpr std::size_t kDivergedAfter = 50;
constexpr int kMaxRetreats = 30;

}  // namespace

FitResult fit(const ModelSpec& spec, const Lesion& calibration, const CalibrationConfig& config,
              const HoldoutPoints& holdout) {
  config.validate();
  if (holdout.times.size() != holdout.volumes.size()) {
    throw Error(ErrorCode::LengthMismatch, "holdout times and volumes differ in length");
  }
  const double origin = calibration.times().front();
  const double span = calibration.times().back() - origin;
  const double scale = max_volume(calibration);

  std::vector<double> unit_times(calibration.size());
  std::vector<double> unit_volumes(calibration.size());
  for (std::size_t i = 0; i < calibration.size(); ++i) {
    unit_times[i] = (calibration.times()[i] - origin) / span;
    unit_volumes[i] = calibration.volumes()[i] / scale;
  }

  FitResult result;
  result.spec = spec;
  result.time_origin = origin;
  result.volume_scale = scale;
  result.holdout_times = holdout.times;

  // Volumes spanning more than the double range underflow to zero here.
  std::optional<Lesion> normalized;
  try {
    normalized = Lesion::validate(calibration.id(), std::move(unit_times), std::move(unit_volumes));
  } catch (const LesionError&) {
    result.params = initialize(spec, calibration, config.seed);
    result.status = FitStatus::Diverged;
    return result;
  }
  const Lesion& unit = *normalized;

  const ParamVector start = initialize(spec, unit, config.seed);
  const auto lower = start.lower_bounds();
  const auto upper = start.upper_bounds();
  const std::size_t np = start.size();

  auto evaluate = [&](std::span<const double> x) {
    return loss_and_gradient(spec, x, unit, config.penalty_kappa, config.solve);
  };

  std::vector<double> x(start.values().begin(), start.values().end());
  std::optional<LossGradient> current = evaluate(x);
  std::vector<double> best_x = x;
  double best = current ? current->value : std::numeric_limits<double>::infinity();

  std::vector<double> m(np, 0.0);
  std::vector<double> v(np, 0.0);
  std::vector<double> candidate(np);
  double beta1_pow = 1.0;
  double beta2_pow = 1.0;
  double reference = best;
  std::size_t last_improvement = 0;
  result.status = FitStatus::EarlyStopped;

  std::size_t it = 0;
  while (it < config.max_iters) {
    ++it;
    if (!current) {
      result.loss_trace.push_back(best);
      if (it >= kDivergedAfter) {
        result.status = FitStatus::Diverged;
        break;
      }
      continue;
    }

    beta1_pow *= config.adam_beta1;
    beta2_pow *= config.adam_beta2;
    for (std::size_t i = 0; i < np; ++i) {
      const double g = current->gradient[i];
      m[i] = config.adam_beta1 * m[i] + (1.0 - config.adam_beta1) * g;
      v[i] = config.adam_beta2 * v[i] + (1.0 - config.adam_beta2) * g * g;
      const double m_hat = m[i] / (1.0 - beta1_pow);
      const double v_hat = v[i] / (1.0 - beta2_pow);
      const double proposed = x[i] - config.learning_rate * m_hat / (std::sqrt(v_hat) + config.adam_eps);
      candidate[i] = bounded_step(x[i], proposed, lower[i], upper[i]);
    }

    auto next = evaluate(candidate);
    for (int retreat = 0; !next && retreat < kMaxRetreats; ++retreat) {
      for (std::size_t i = 0; i < np; ++i) candidate[i] = 0.5 * (x[i] + candidate[i]);
      next = evaluate(candidate);
    }
    if (next) {
      x = candidate;
      current = std::move(next);
      if (current->value < best) {
        best = current->value;
        best_x = x;
      }
    }
    result.loss_trace.push_back(best);

    if (best < reference - config.early_stop_rel_tol * std::abs(reference)) {
      reference = best;
      last_improvement = it;
    } else if (it - last_improvement >= config.early_stop_patience) {
      result.status = FitStatus::Converged;
      break;
    }
  }
  result.iterations = it;
  if (!std::isfinite(best)) result.status = FitStatus::Diverged;

  try {
    result.params = ParamVector::for_spec(spec, to_lesion_units(spec, best_x, span, scale));
  } catch (const Error&) {
    // Rescaling overflowed; keep the lesion-unit starting point.
    result.params = initialize(spec, calibration, config.seed);
    result.status = FitStatus::Diverged;
  }
  if (result.status == FitStatus::Diverged) return result;

  if (!holdout.times.empty()) {
    std::vector<double> rel(holdout.times.size());
    for (std::size_t i = 0; i < rel.size(); ++i) rel[i] = holdout.times[i] - origin;
    const auto predicted = try_predict(spec, result.params.values(), rel, config.solve);
    if (!predicted) {
      result.status = FitStatus::Diverged;
      return result;
    }
    result.holdout_predictions = *predicted;
    for (std::size_t i = 0; i < rel.size(); ++i) {
      result.holdout_abs_errors.push_back(std::abs((*predicted)[i] - holdout.volumes[i]));
    }
  }
  return result;
}

}  // namespace odegrow
