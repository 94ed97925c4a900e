#pragma once

#include <cmath>
#include <numbers>

namespace roughhedge {

inline constexpr double kEulerGamma = 0.577215664901532860606512090082;

template <typename Scalar>
inline Scalar normal_pdf(Scalar z) {
  using std::exp;
  return Scalar(0.5 * std::numbers::inv_sqrtpi * std::numbers::sqrt2) * exp(-Scalar(0.5) * z * z);
}

/// Standard normal CDF through erfc, so the lower tail keeps full relative accuracy.
template <typename Scalar>
inline Scalar normal_cdf(Scalar z) {
  using std::erfc;
  return Scalar(0.5) * erfc(-z / Scalar(std::numbers::sqrt2));
}

/// Inverse of normal_cdf on (0, 1).
double normal_quantile(double p);

/// E1(z) = int_z^inf e^{-t}/t dt for z > 0. Throws DomainError otherwise.
double exp_integral_e1(double z);

/// Ei(x) = -PV int_{-x}^inf e^{-t}/t dt for x > 0. Throws DomainError otherwise.
double exp_integral_ei(double x);

/// Ei(x) - gamma - ln x = sum_{k>=1} x^k / (k k!) for x >= 0. The series has
/// no cancellation, so small arguments keep full relative accuracy.
double exp_integral_ei_entire(double x);

/// e^{-t} int_0^t u^b e^u du for b > -1, t >= 0.
///
/// This is the building block of the fOU kernel (b = H - 1/2) and of the
/// fOU covariance (b = 2H). Evaluated by a Poisson-weighted series for
/// t <= 40 and by its asymptotic expansion beyond, where the neglected
/// term is of order e^{-t}.
double exp_weighted_power_integral(double b, double t);

/// t^b - exp_weighted_power_integral(b, t), evaluated without cancellation
/// at large t. Equals c^{-1} * fOU kernel with b = H - 1/2.
double power_minus_exp_weighted(double b, double t);

/// e^x * Gamma(a, x) (scaled upper incomplete gamma) for a > 0, x >= 0.
double scaled_upper_gamma(double a, double x);

}  // namespace roughhedge
