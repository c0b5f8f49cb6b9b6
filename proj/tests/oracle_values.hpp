#pragma once

// Reference values from tests/oracles/compute_oracles.py (mpmath, 40
// significant digits), rounded to the nearest double.

namespace odegrow::oracle {

inline constexpr double kBoxCox2AtMinus1 = 0.5;
inline constexpr double kBertalanffyGompertz = 1.5498413690199014435;    // t=1, v0=1, v_inf=2, omega=1, lambda=0
inline constexpr double kBertalanffyQuarter = 1.3036935634452795582;     // t=3, 0.4, 1.5, 0.7, lambda=0.25
inline constexpr double kBertalanffyNegative = 0.94969121542319597938;   // t=2, 2, 0.5, 0.3, lambda=-0.5
inline constexpr double kBertalanffyLogistic = 2.0067255088371057317;    // t=5, 0.3, 3, 0.2, lambda=1
inline constexpr double kPenalty = 0.011954406247375462321;              // 0.01 * 1.25^0.8
inline constexpr double kMlp131 = 0.64404579161814244396;
inline constexpr double kMlp222First = -0.22518289538279592793;
inline constexpr double kMlp222Second = 0.44548141986155607833;
inline constexpr double kExponentialOmegaSensitivity = -1.119623553127953037;  // t=1.7, omega=0.4, v0=1.3

inline constexpr double kTheta131[10] = {0.5, -1.2, 0.8, 0.1, 0.0, -0.3, 1.5, -0.7, 0.25, 0.05};
inline constexpr double kTheta222[12] = {0.3, -0.6, 1.1, 0.4, 0.2, -0.1, -0.9, 0.5, 0.7, 1.3, 0.05, -0.02};

}  // namespace odegrow::oracle
