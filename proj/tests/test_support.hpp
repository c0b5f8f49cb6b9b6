#pragma once

#include <random>
#include <vector>

#include "odegrow/core.hpp"

namespace odegrow::testing {

/// In-bounds random parameters sized for times of order one.
inline std::vector<double> sample_params(const ModelSpec& spec, std::mt19937_64& rng) {
  auto u = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
  if (spec.kind() == ModelKind::Exponential) return {u(0.5, 2.0), u(-0.5, 0.5)};
  std::vector<double> p{u(0.5, 2.0), u(1.5, 4.0)};
  if (is_neural(spec.kind())) {
    while (p.size() < spec.parameter_count()) p.push_back(u(-0.5, 0.5));
    return p;
  }
  p.push_back(u(0.2, 1.2));
  if (spec.parameter_count() > 3) p.push_back(u(-0.8, 0.8));
  if (spec.parameter_count() > 4) p.push_back(u(-0.3, 0.3));
  return p;
}

}  // namespace odegrow::testing
