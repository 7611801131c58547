#pragma once

#include <string_view>
#include <vector>

#include "gconv/payoff.hpp"
#include "gconv/payoff_expr.hpp"

namespace gconv::testing {

// Closed-form standard Gaussian moments used as frozen references:
//
//   E|Z|          = sqrt(2/pi)
//   E|Z|^3        = 2 sqrt(2/pi)
//   E[(2Z)^+]     = 2 / sqrt(2 pi)
//   E[(2Z - 1)^+] = 2 phi(1/2) - Phi(-1/2)   (Bachelier, sigma = 2, K = 1)
inline constexpr double kAbsZ = 0.7978845608028654;
inline constexpr double kAbsZCubed = 1.5957691216057308;
inline constexpr double kCallK0Sigma2 = 0.7978845608028654;
inline constexpr double kCallK1Sigma2 = 0.39559311480261206;

inline CylinderPayoff payoff_of(std::string_view expr, std::vector<double> times) {
    return CylinderPayoff::from_expr(parse_payoff(expr), std::move(times));
}

}  // namespace gconv::testing
