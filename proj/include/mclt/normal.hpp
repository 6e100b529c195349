#pragma once

// Standard normal helpers used by the exact distance computations.

namespace mclt::normal {

inline constexpr double kInvSqrt2Pi = 0.39894228040143267794;
inline constexpr double kSqrt2OverPi = 0.79788456080286535588;

double pdf(double x);
double cdf(double x);
/// 1 - cdf(x) without cancellation.
double ccdf(double x);
/// Inverse of cdf on (0, 1); returns -inf / +inf at 0 / 1.
double quantile(double p);

/// A(x) = integral of cdf over (-inf, x] = x cdf(x) + pdf(x).
double cdf_integral_below(double x);
/// B(x) = integral of ccdf over [x, inf) = pdf(x) - x ccdf(x).
double ccdf_integral_above(double x);

}  // namespace mclt::normal
