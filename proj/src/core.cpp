#include "odegrow/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace odegrow {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::NonMonotoneTimes: return "NonMonotoneTimes";
    case ErrorCode::NonPositiveVolume: return "NonPositiveVolume";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::TooFewPoints: return "TooFewPoints";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::BlowUp: return "BlowUp";
    case ErrorCode::Diverged: return "Diverged";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::TooFewMeasurements: return "TooFewMeasurements";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::NoUsableLesions: return "NoUsableLesions";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::UnknownModel: return "UnknownModel";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

Lesion Lesion::validate(std::string id, std::vector<double> times, std::vector<double> volumes) {
  if (times.size() != volumes.size()) {
    const std::size_t index = std::min(times.size(), volumes.size());
    throw LesionError(ErrorCode::LengthMismatch, index,
                      "lesion '" + id + "': " + std::to_string(times.size()) + " times but " +
                          std::to_string(volumes.size()) + " volumes");
  }
  if (times.size() < 2) {
    throw LesionError(ErrorCode::TooFewPoints, times.size(),
                      "lesion '" + id + "': at least 2 measurements required");
  }
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!std::isfinite(times[i]) || (i > 0 && !(times[i] > times[i - 1]))) {
      throw LesionError(ErrorCode::NonMonotoneTimes, i,
                        "lesion '" + id + "': time at index " + std::to_string(i) +
                            " is not strictly after the previous one");
    }
    if (!std::isfinite(volumes[i]) || !(volumes[i] > 0.0)) {
      throw LesionError(ErrorCode::NonPositiveVolume, i,
                        "lesion '" + id + "': volume at index " + std::to_string(i) +
                            " is not a positive finite number");
    }
  }
  return Lesion(std::move(id), std::move(times), std::move(volumes));
}

std::string_view to_string(ModelKind kind) noexcept {
  switch (kind) {
    case ModelKind::Exponential: return "exponential";
    case ModelKind::Logistic: return "logistic";
    case ModelKind::ClassicalBertalanffy: return "classical_bertalanffy";
    case ModelKind::ClassicalGompertz: return "gompertz";
    case ModelKind::GeneralBertalanffy: return "bertalanffy";
    case ModelKind::Bertalanffy2D: return "bertalanffy2";
    case ModelKind::Neural1D: return "neural";
    case ModelKind::Neural2D: return "neural2";
  }
  return "unknown";
}

std::string_view display_name(ModelKind kind) noexcept {
  switch (kind) {
    case ModelKind::Exponential: return "exponential";
    case ModelKind::Logistic: return "logistic";
    case ModelKind::ClassicalBertalanffy: return "classical Bertalanffy";
    case ModelKind::ClassicalGompertz: return "classical Gompertz";
    case ModelKind::GeneralBertalanffy: return "General Bertalanffy";
    case ModelKind::Bertalanffy2D: return "2D General Bertalanffy";
    case ModelKind::Neural1D: return "1D neural ODE";
    case ModelKind::Neural2D: return "2D neural ODE";
  }
  return "unknown";
}

std::optional<ModelKind> parse_model_kind(std::string_view name) noexcept {
  for (ModelKind kind : kAllModelKinds) {
    if (to_string(kind) == name) return kind;
  }
  return std::nullopt;
}

std::string model_kind_list() {
  std::string out;
  for (ModelKind kind : kAllModelKinds) {
    if (!out.empty()) out += ", ";
    out += to_string(kind);
  }
  return out;
}

ModelSpec ModelSpec::of(ModelKind kind) {
  ModelSpec spec;
  spec.kind_ = kind;
  switch (kind) {
    case ModelKind::Logistic: spec.lambda_fixed_ = -1.0; break;
    case ModelKind::ClassicalBertalanffy: spec.lambda_fixed_ = 1.0 / 3.0; break;
    case ModelKind::ClassicalGompertz: spec.lambda_fixed_ = 0.0; break;
    case ModelKind::Neural1D: spec.mlp_shape_ = MlpShape{1, 3, 1}; break;
    case ModelKind::Neural2D: spec.mlp_shape_ = MlpShape{2, 2, 2}; break;
    default: break;
  }
  return spec;
}

std::size_t ModelSpec::state_dim() const noexcept {
  return (kind_ == ModelKind::Bertalanffy2D || kind_ == ModelKind::Neural2D) ? 2 : 1;
}

bool ModelSpec::uses_solver() const noexcept {
  return kind_ == ModelKind::Bertalanffy2D || is_neural(kind_);
}

std::size_t ModelSpec::parameter_count() const noexcept {
  switch (kind_) {
    case ModelKind::Exponential: return 2;
    case ModelKind::Logistic:
    case ModelKind::ClassicalBertalanffy:
    case ModelKind::ClassicalGompertz: return 3;
    case ModelKind::GeneralBertalanffy: return 4;
    case ModelKind::Bertalanffy2D: return 5;
    case ModelKind::Neural1D:
    case ModelKind::Neural2D: return 2 + mlp_shape_->parameter_count();
  }
  return 0;
}

std::vector<std::string> ModelSpec::parameter_names() const {
  switch (kind_) {
    case ModelKind::Exponential: return {"v0", "omega"};
    case ModelKind::Logistic:
    case ModelKind::ClassicalBertalanffy:
    case ModelKind::ClassicalGompertz: return {"v0", "v_inf", "omega"};
    case ModelKind::GeneralBertalanffy: return {"v0", "v_inf", "omega", "lambda"};
    case ModelKind::Bertalanffy2D: return {"v0", "v_inf", "omega", "lambda", "gamma"};
    case ModelKind::Neural1D:
    case ModelKind::Neural2D: {
      std::vector<std::string> names{"v0", "v_inf"};
      for (std::size_t i = 0; i < mlp_shape_->parameter_count(); ++i) {
        names.push_back("w[" + std::to_string(i) + "]");
      }
      return names;
    }
  }
  return {};
}

ParamVector::ParamVector(std::vector<std::string> names, std::vector<double> values,
                         std::vector<double> lower, std::vector<double> upper)
    : names_(std::move(names)), values_(std::move(values)), lower_(std::move(lower)), upper_(std::move(upper)) {
  if (names_.size() != values_.size() || lower_.size() != values_.size() || upper_.size() != values_.size()) {
    throw Error(ErrorCode::InvalidConfig, "parameter vector fields have different lengths");
  }
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!(lower_[i] < upper_[i])) {
      throw Error(ErrorCode::InvalidConfig, "empty bounds for parameter '" + names_[i] + "'");
    }
    if (!(values_[i] > lower_[i] && values_[i] < upper_[i])) {
      throw Error(ErrorCode::InvalidConfig, "parameter '" + names_[i] + "' = " + std::to_string(values_[i]) +
                                                " is outside its bounds");
    }
  }
}

ParamVector ParamVector::for_spec(const ModelSpec& spec, std::vector<double> values) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  auto names = spec.parameter_names();
  std::vector<double> lower(names.size(), -inf);
  std::vector<double> upper(names.size(), inf);
  lower[param::kV0] = 0.0;
  switch (spec.kind()) {
    case ModelKind::Exponential:
      break;
    case ModelKind::Bertalanffy2D:
      lower[param::kGamma] = -10.0;
      upper[param::kGamma] = 10.0;
      [[fallthrough]];
    case ModelKind::GeneralBertalanffy:
      lower[param::kLambda] = -5.0;
      upper[param::kLambda] = 5.0;
      [[fallthrough]];
    case ModelKind::Logistic:
    case ModelKind::ClassicalBertalanffy:
    case ModelKind::ClassicalGompertz:
      lower[param::kVInf] = 0.0;
      lower[param::kOmega] = 0.0;
      break;
    case ModelKind::Neural1D:
    case ModelKind::Neural2D:
      lower[param::kVInf] = 0.0;
      break;
  }
  return ParamVector(std::move(names), std::move(values), std::move(lower), std::move(upper));
}

ParamVector ParamVector::with_values(std::vector<double> values) const {
  return ParamVector(names_, std::move(values), lower_, upper_);
}

std::string_view to_string(FitStatus status) noexcept {
  switch (status) {
    case FitStatus::Converged: return "Converged";
    case FitStatus::EarlyStopped: return "EarlyStopped";
    case FitStatus::Diverged: return "Diverged";
  }
  return "Unknown";
}

double FitResult::final_loss() const noexcept {
  return loss_trace.empty() ? std::numeric_limits<double>::infinity() : loss_trace.back();
}

}  // namespace odegrow
