#pragma once

// Scalar-generic model formulas. Every kernel is instantiated with double
// for plain evaluation and with Dual<N> for exact first derivatives; both
// instantiations follow the same floating-point path.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>

#include "odegrow/core.hpp"
#include "odegrow/dual.hpp"
#include "odegrow/models.hpp"
#include "odegrow/solver.hpp"

namespace odegrow::kernels {

using std::exp;
using std::expm1;
using std::log;
using std::log1p;
using std::tanh;

template <class T, class L>
T box_cox(const T& x, const L& lambda) {
  const T lx = log(x);
  if (std::abs(value_of(lambda)) < kBoxCoxSeriesThreshold) {
    return lx + lambda * (lx * lx) / 2.0 + (lambda * lambda) * (lx * lx * lx) / 6.0;
  }
  return expm1(lambda * lx) / lambda;
}

/// Returns NaN once the solution has blown up (non-positive base).
template <class T, class L>
T bertalanffy(double t, const T& v0, const T& v_inf, const T& omega, const L& lambda) {
  const T z = box_cox(v0 / v_inf, lambda) * exp(-(omega * t));
  const T lz = lambda * z;
  if (value_of(lz) <= -1.0) return T(std::numeric_limits<double>::quiet_NaN());
  T growth;
  if (std::abs(value_of(lambda)) < kBoxCoxSeriesThreshold) {
    // log1p(lambda z) / lambda to third order in lambda.
    growth = z - lambda * (z * z) / 2.0 + (lambda * lambda) * (z * z * z) / 3.0;
  } else {
    growth = log1p(lz) / lambda;
  }
  return v_inf * exp(growth);
}

template <class T>
T exponential(double t, const T& v0, const T& omega) {
  return v0 * exp(-(omega * t));
}

inline constexpr std::size_t kMaxHidden = 8;

template <class T, class W>
void mlp(const MlpShape& shape, const W* theta, const T* input, T* output) {
  const W* w1 = theta;
  const W* b1 = w1 + shape.hidden * shape.inputs;
  const W* w2 = b1 + shape.hidden;
  const W* b2 = w2 + shape.outputs * shape.hidden;
  std::array<T, kMaxHidden> hidden{};
  for (std::size_t k = 0; k < shape.hidden; ++k) {
    T acc = b1[k];
    for (std::size_t i = 0; i < shape.inputs; ++i) acc += w1[k * shape.inputs + i] * input[i];
    hidden[k] = tanh(acc);
  }
  for (std::size_t o = 0; o < shape.outputs; ++o) {
    T acc = b2[o];
    for (std::size_t k = 0; k < shape.hidden; ++k) acc += w2[o * shape.hidden + k] * hidden[k];
    output[o] = acc;
  }
}

/// Closed-form volume in the parameter layout of `spec`: NP = 2 is
/// Exponential, 3 a pinned-lambda model, 4 General Bertalanffy.
template <class T, std::size_t NP>
T closed_form(const ModelSpec& spec, const std::array<T, NP>& p, double t) {
  if constexpr (NP == 2) {
    return exponential(t, p[param::kV0], p[param::kExponentialOmega]);
  } else if constexpr (NP == 3) {
    return bertalanffy(t, p[param::kV0], p[param::kVInf], p[param::kOmega], *spec.lambda_fixed());
  } else {
    return bertalanffy(t, p[param::kV0], p[param::kVInf], p[param::kOmega], p[param::kLambda]);
  }
}

/// ODE system whose Jacobians come from forward-mode duals over
/// (state, params). Derived provides `template <class T> void eval(x, p, dx) const`.
template <class Derived, std::size_t Dim, std::size_t NP>
class DualSystem : public OdeSystem {
 public:
  [[nodiscard]] std::size_t state_dim() const override { return Dim; }
  [[nodiscard]] std::size_t param_dim() const override { return NP; }

  void derivative(std::span<const double> x, std::span<const double> p, std::span<double> dx) const override {
    std::array<double, Dim> xs{};
    std::array<double, NP> ps{};
    std::array<double, Dim> out{};
    for (std::size_t i = 0; i < Dim; ++i) xs[i] = x[i];
    for (std::size_t i = 0; i < NP; ++i) ps[i] = p[i];
    static_cast<const Derived&>(*this).eval(xs, ps, out);
    for (std::size_t i = 0; i < Dim; ++i) dx[i] = out[i];
  }

  void linearize(std::span<const double> x, std::span<const double> p, std::span<double> dx, std::span<double> jx,
                 std::span<double> jp) const override {
    using D = Dual<Dim + NP>;
    std::array<D, Dim> xs{};
    std::array<D, NP> ps{};
    std::array<D, Dim> out{};
    for (std::size_t i = 0; i < Dim; ++i) xs[i] = D(x[i], i);
    for (std::size_t i = 0; i < NP; ++i) ps[i] = D(p[i], Dim + i);
    static_cast<const Derived&>(*this).eval(xs, ps, out);
    for (std::size_t i = 0; i < Dim; ++i) {
      dx[i] = out[i].value;
      for (std::size_t j = 0; j < Dim; ++j) jx[i * Dim + j] = out[i].grad[j];
      for (std::size_t q = 0; q < NP; ++q) jp[i * NP + q] = out[i].grad[Dim + q];
    }
  }
};

class ExponentialSystem : public DualSystem<ExponentialSystem, 1, 2> {
 public:
  template <class T>
  void eval(const std::array<T, 1>& x, const std::array<T, 2>& p, std::array<T, 1>& dx) const {
    dx[0] = -(p[param::kExponentialOmega] * x[0]);
  }
};

template <std::size_t NP>
class BertalanffySystem : public DualSystem<BertalanffySystem<NP>, 1, NP> {
 public:
  /// NP = 3 pins lambda to `fixed_lambda`; NP = 4 reads it from the parameters.
  explicit BertalanffySystem(std::optional<double> fixed_lambda) : fixed_lambda_(fixed_lambda) {}

  template <class T>
  void eval(const std::array<T, 1>& x, const std::array<T, NP>& p, std::array<T, 1>& dx) const {
    const T ratio = p[param::kVInf] / x[0];
    if constexpr (NP > param::kLambda) {
      dx[0] = p[param::kOmega] * box_cox(ratio, p[param::kLambda]) * x[0];
    } else {
      dx[0] = p[param::kOmega] * box_cox(ratio, *fixed_lambda_) * x[0];
    }
  }

 private:
  std::optional<double> fixed_lambda_;
};

class Bertalanffy2DSystem : public DualSystem<Bertalanffy2DSystem, 2, 5> {
 public:
  template <class T>
  void eval(const std::array<T, 2>& x, const std::array<T, 5>& p, std::array<T, 2>& dx) const {
    const T& omega = p[param::kOmega];
    dx[0] = omega * box_cox(x[1] / x[0], p[param::kLambda]) * x[0];
    dx[1] = p[param::kGamma] * omega * x[1];
  }

  // Hand-written Jacobian; the dual version remains available through eval.
  void linearize(std::span<const double> x, std::span<const double> p, std::span<double> dx, std::span<double> jx,
                 std::span<double> jp) const override {
    const double v = x[0];
    const double u = x[1];
    const double omega = p[param::kOmega];
    const double lambda = p[param::kLambda];
    const double gamma = p[param::kGamma];
    // Same arithmetic as box_cox(u / v, lambda), keeping the logarithm.
    const double l = log(u / v);
    double b = 0.0;
    double db_dl = 0.0;
    double db_dlambda = 0.0;
    if (std::abs(lambda) < kBoxCoxSeriesThreshold) {
      b = l + lambda * (l * l) / 2.0 + (lambda * lambda) * (l * l * l) / 6.0;
      db_dl = 1.0 + lambda * l + lambda * lambda * (l * l) / 2.0;
      db_dlambda = (l * l) / 2.0 + lambda * (l * l * l) / 3.0;
    } else {
      b = expm1(lambda * l) / lambda;
      db_dl = 1.0 + lambda * b;
      db_dlambda = (l * db_dl - b) / lambda;
    }
    dx[0] = omega * b * v;
    dx[1] = gamma * omega * u;
    jx[0] = omega * (b - db_dl);
    jx[1] = omega * v * db_dl / u;
    jx[2] = 0.0;
    jx[3] = gamma * omega;
    jp[0] = 0.0;
    jp[1] = 0.0;
    jp[param::kOmega] = b * v;
    jp[param::kLambda] = omega * v * db_dlambda;
    jp[param::kGamma] = 0.0;
    jp[5 + 0] = 0.0;
    jp[5 + 1] = 0.0;
    jp[5 + param::kOmega] = gamma * u;
    jp[5 + param::kLambda] = 0.0;
    jp[5 + param::kGamma] = omega * u;
  }
};

/// Neural right-hand side. `derivative` goes through the generic mlp kernel;
/// `linearize` differentiates the network by hand with the same forward
/// arithmetic, so values agree bitwise with `derivative`.
template <std::size_t Dim, std::size_t NP>
class NeuralSystem : public OdeSystem {
 public:
  // NP = 2 + hidden * Dim + hidden + Dim * hidden + Dim
  static constexpr std::size_t kHidden = (NP - param::kNetworkOffset - Dim) / (2 * Dim + 1);
  static_assert(param::kNetworkOffset + kHidden * (2 * Dim + 1) + Dim == NP);

  explicit NeuralSystem(MlpShape shape) : shape_(shape) {}

  [[nodiscard]] std::size_t state_dim() const override { return Dim; }
  [[nodiscard]] std::size_t param_dim() const override { return NP; }

  void derivative(std::span<const double> x, std::span<const double> p, std::span<double> dx) const override {
    mlp(shape_, p.data() + param::kNetworkOffset, x.data(), dx.data());
  }

  void linearize(std::span<const double> x, std::span<const double> p, std::span<double> dx, std::span<double> jx,
                 std::span<double> jp) const override {
    constexpr std::size_t kOffB1 = param::kNetworkOffset + kHidden * Dim;
    constexpr std::size_t kOffW2 = kOffB1 + kHidden;
    constexpr std::size_t kOffB2 = kOffW2 + Dim * kHidden;
    const double* w1 = p.data() + param::kNetworkOffset;
    const double* b1 = p.data() + kOffB1;
    const double* w2 = p.data() + kOffW2;
    const double* b2 = p.data() + kOffB2;

    std::array<double, kHidden> h{};
    std::array<double, kHidden> slope{};
    for (std::size_t k = 0; k < kHidden; ++k) {
      double acc = b1[k];
      for (std::size_t i = 0; i < Dim; ++i) acc += w1[k * Dim + i] * x[i];
      h[k] = tanh(acc);
      slope[k] = 1.0 - h[k] * h[k];
    }
    for (std::size_t o = 0; o < Dim; ++o) {
      double acc = b2[o];
      for (std::size_t k = 0; k < kHidden; ++k) acc += w2[o * kHidden + k] * h[k];
      dx[o] = acc;
      double* row = jp.data() + o * NP;
      for (std::size_t q = 0; q < NP; ++q) row[q] = 0.0;
      for (std::size_t i = 0; i < Dim; ++i) jx[o * Dim + i] = 0.0;
      for (std::size_t k = 0; k < kHidden; ++k) {
        const double back = w2[o * kHidden + k] * slope[k];
        for (std::size_t i = 0; i < Dim; ++i) {
          jx[o * Dim + i] += back * w1[k * Dim + i];
          row[param::kNetworkOffset + k * Dim + i] = back * x[i];
        }
        row[kOffB1 + k] = back;
        row[kOffW2 + o * kHidden + k] = h[k];
      }
      row[kOffB2 + o] = 1.0;
    }
  }

 private:
  MlpShape shape_;
};

}  // namespace odegrow::kernels
