#pragma once

#include <cmath>
#include <numbers>

#include <boost/math/special_functions/erf.hpp>

namespace cnmot::normal {

inline constexpr double kInvSqrt2Pi = 0.39894228040143267794;

inline double pdf(double z) { return kInvSqrt2Pi * std::exp(-0.5 * z * z); }

inline double cdf(double z) { return 0.5 * std::erfc(-z * std::numbers::sqrt2 / 2.0); }

// Upper tail 1 - Phi(z), accurate for large z.
inline double sf(double z) { return 0.5 * std::erfc(z * std::numbers::sqrt2 / 2.0); }

inline double quantile(double u)
{
    if (u <= 0.0) return -INFINITY;
    if (u >= 1.0) return INFINITY;
    return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * u);
}

// Psi(z) = z Phi(z) + phi(z), the antiderivative of Phi.
inline double psi(double z)
{
    if (z > 0.0) return z - z * sf(z) + pdf(z);
    return z * cdf(z) + pdf(z);
}

}  // namespace cnmot::normal
