#pragma once

#include <array>
#include <cmath>
#include <cstddef>

namespace odegrow {

/// Forward-mode dual number carrying N directional derivatives.
///
/// The value path performs exactly the floating-point operations of the
/// plain double computation, so templated kernels evaluated with Dual<N>
/// and with double produce bitwise-identical values.
template <std::size_t N>
struct Dual {
  double value = 0.0;
  std::array<double, N> grad{};

  constexpr Dual() = default;
  constexpr Dual(double v) : value(v) {}  // NOLINT: implicit lift of constants
  constexpr Dual(double v, std::size_t seed_index) : value(v) { grad[seed_index] = 1.0; }

  Dual& operator+=(const Dual& o) {
    value += o.value;
    for (std::size_t i = 0; i < N; ++i) grad[i] += o.grad[i];
    return *this;
  }
  Dual& operator-=(const Dual& o) {
    value -= o.value;
    for (std::size_t i = 0; i < N; ++i) grad[i] -= o.grad[i];
    return *this;
  }
  Dual& operator*=(const Dual& o) {
    for (std::size_t i = 0; i < N; ++i) grad[i] = grad[i] * o.value + value * o.grad[i];
    value *= o.value;
    return *this;
  }
  Dual& operator/=(const Dual& o) {
    const double inv = 1.0 / o.value;
    const double q = value / o.value;
    for (std::size_t i = 0; i < N; ++i) grad[i] = (grad[i] - q * o.grad[i]) * inv;
    value = q;
    return *this;
  }
};

template <std::size_t N>
Dual<N> operator+(Dual<N> a, const Dual<N>& b) { return a += b; }
template <std::size_t N>
Dual<N> operator-(Dual<N> a, const Dual<N>& b) { return a -= b; }
template <std::size_t N>
Dual<N> operator*(Dual<N> a, const Dual<N>& b) { return a *= b; }
template <std::size_t N>
Dual<N> operator/(Dual<N> a, const Dual<N>& b) { return a /= b; }

template <std::size_t N>
Dual<N> operator+(Dual<N> a, double b) { a.value += b; return a; }
template <std::size_t N>
Dual<N> operator+(double a, Dual<N> b) { b.value = a + b.value; return b; }
template <std::size_t N>
Dual<N> operator-(Dual<N> a, double b) { a.value -= b; return a; }
template <std::size_t N>
Dual<N> operator-(double a, Dual<N> b) {
  b.value = a - b.value;
  for (auto& g : b.grad) g = -g;
  return b;
}
template <std::size_t N>
Dual<N> operator-(Dual<N> a) {
  a.value = -a.value;
  for (auto& g : a.grad) g = -g;
  return a;
}
template <std::size_t N>
Dual<N> operator*(Dual<N> a, double b) {
  a.value *= b;
  for (auto& g : a.grad) g *= b;
  return a;
}
template <std::size_t N>
Dual<N> operator*(double a, Dual<N> b) {
  b.value = a * b.value;
  for (auto& g : b.grad) g *= a;
  return b;
}
template <std::size_t N>
Dual<N> operator/(Dual<N> a, double b) {
  a.value /= b;
  for (auto& g : a.grad) g /= b;
  return a;
}
template <std::size_t N>
Dual<N> operator/(double a, const Dual<N>& b) {
  Dual<N> out;
  out.value = a / b.value;
  const double scale = -out.value / b.value;
  for (std::size_t i = 0; i < N; ++i) out.grad[i] = scale * b.grad[i];
  return out;
}

namespace detail {
template <std::size_t N>
Dual<N> chain(const Dual<N>& x, double value, double derivative) {
  Dual<N> out;
  out.value = value;
  for (std::size_t i = 0; i < N; ++i) out.grad[i] = derivative * x.grad[i];
  return out;
}
}  // namespace detail

template <std::size_t N>
Dual<N> exp(const Dual<N>& x) {
  const double e = std::exp(x.value);
  return detail::chain(x, e, e);
}
template <std::size_t N>
Dual<N> log(const Dual<N>& x) { return detail::chain(x, std::log(x.value), 1.0 / x.value); }
template <std::size_t N>
Dual<N> log1p(const Dual<N>& x) { return detail::chain(x, std::log1p(x.value), 1.0 / (1.0 + x.value)); }
template <std::size_t N>
Dual<N> expm1(const Dual<N>& x) { return detail::chain(x, std::expm1(x.value), std::exp(x.value)); }
template <std::size_t N>
Dual<N> tanh(const Dual<N>& x) {
  const double t = std::tanh(x.value);
  return detail::chain(x, t, 1.0 - t * t);
}

template <std::size_t N>
bool operator<(const Dual<N>& a, double b) { return a.value < b; }
template <std::size_t N>
bool operator>(const Dual<N>& a, double b) { return a.value > b; }
template <std::size_t N>
bool operator<=(const Dual<N>& a, double b) { return a.value <= b; }

inline double value_of(double x) { return x; }
template <std::size_t N>
double value_of(const Dual<N>& x) { return x.value; }

}  // namespace odegrow
