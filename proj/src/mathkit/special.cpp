#include "roughhedge/mathkit/special.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "roughhedge/mathkit/errors.hpp"

namespace roughhedge {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kTiny = 1e-300;
constexpr double kAsymptoticSwitch = 40.0;

// Acklam's rational approximation, good to ~1e-9 before refinement.
double quantile_initial_guess(double p) {
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                                 1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                                 6.680131188771972e+01,  -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                                 -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                                 3.754408661907416e+00};
  constexpr double p_low = 0.02425;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (p > 1.0 - p_low) {
    const double q = std::sqrt(-2.0 * std::log1p(-p));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double q = p - 0.5;
  const double r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

}  // namespace

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("normal_quantile: p must lie in (0, 1)");
  double x = quantile_initial_guess(p);
  // Two Halley steps on cdf(x) - p bring the guess to full precision.
  for (int i = 0; i < 2; ++i) {
    const double e = (p < 0.5) ? normal_cdf(x) - p : (1.0 - p) - normal_cdf(-x);
    const double u = e / normal_pdf(x);
    x -= u / (1.0 + 0.5 * x * u);
  }
  return x;
}

double exp_integral_e1(double z) {
  if (!(z > 0.0)) throw DomainError("exp_integral_e1: z must be positive");
  if (z <= 1.0) {
    double sum = 0.0;
    double term = 1.0;
    for (int k = 1; k < 200; ++k) {
      term *= -z / k;
      const double contrib = -term / k;
      sum += contrib;
      if (std::abs(contrib) < kEps * std::abs(sum)) break;
    }
    return -kEulerGamma - std::log(z) + sum;
  }
  // Modified Lentz on the continued fraction for e^z E1(z).
  double b = z + 1.0;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 1000; ++i) {
    const double a = -static_cast<double>(i) * i;
    b += 2.0;
    d = 1.0 / (a * d + b);
    c = b + a / c;
    const double del = c * d;
    h *= del;
    if (std::abs(del - 1.0) < kEps) return h * std::exp(-z);
  }
  throw NumericalError("exp_integral_e1: continued fraction did not converge", h * std::exp(-z));
}

double exp_integral_ei_entire(double x) {
  if (!(x >= 0.0)) throw DomainError("exp_integral_ei_entire: x must be non-negative");
  if (x > -std::log(kEps)) return exp_integral_ei(x) - kEulerGamma - std::log(x);
  double sum = 0.0;
  double fact = 1.0;
  for (int k = 1; k < 500; ++k) {
    fact *= x / k;
    const double term = fact / k;
    sum += term;
    if (term <= kEps * sum) break;
  }
  return sum;
}

double exp_integral_ei(double x) {
  if (!(x > 0.0)) throw DomainError("exp_integral_ei: x must be positive");
  if (x < kTiny) return std::log(x) + kEulerGamma;
  if (x <= -std::log(kEps)) {
    double sum = 0.0;
    double fact = 1.0;
    for (int k = 1; k < 500; ++k) {
      fact *= x / k;
      const double term = fact / k;
      sum += term;
      if (term < kEps * sum) break;
    }
    return sum + std::log(x) + kEulerGamma;
  }
  double sum = 1.0;
  double term = 1.0;
  for (int k = 1; k < 100; ++k) {
    const double prev = term;
    term *= k / x;
    if (term < kEps) break;
    if (term < prev) {
      sum += term;
    } else {
      sum -= prev;
      break;
    }
  }
  return std::exp(x) * sum / x;
}

double exp_weighted_power_integral(double b, double t) {
  if (!(b > -1.0)) throw DomainError("exp_weighted_power_integral: b must exceed -1");
  if (t < 0.0) throw DomainError("exp_weighted_power_integral: t must be non-negative");
  if (t == 0.0) return 0.0;
  if (t <= kAsymptoticSwitch) {
    double q = std::exp(-t);
    double sum = q / (b + 1.0);
    for (int n = 1; n < 2000; ++n) {
      q *= t / n;
      const double term = q / (n + b + 1.0);
      sum += term;
      if (n > t && term < 1e-17 * sum) break;
    }
    return std::pow(t, b + 1.0) * sum;
  }
  double term = 1.0;
  double sum = 1.0;
  for (int n = 1; n < 200; ++n) {
    const double next = term * (-(b - n + 1.0) / t);
    if (std::abs(next) >= std::abs(term) || std::abs(next) < 1e-18) break;
    term = next;
    sum += term;
  }
  return std::pow(t, b) * sum;
}

double power_minus_exp_weighted(double b, double t) {
  if (t <= 0.0) throw DomainError("power_minus_exp_weighted: t must be positive");
  if (t <= kAsymptoticSwitch) return std::pow(t, b) - exp_weighted_power_integral(b, t);
  // -sum_{n>=1} (-1)^n b(b-1)...(b-n+1) / t^n, the n = 0 term cancels t^b.
  double term = 1.0;
  double sum = 0.0;
  for (int n = 1; n < 200; ++n) {
    const double next = term * (-(b - n + 1.0) / t);
    if (n > 1 && (std::abs(next) >= std::abs(term) || std::abs(next) < 1e-18 * std::abs(sum))) break;
    term = next;
    sum += term;
  }
  return -std::pow(t, b) * sum;
}

double scaled_upper_gamma(double a, double x) {
  if (!(a > 0.0)) throw DomainError("scaled_upper_gamma: a must be positive");
  if (x < 0.0) throw DomainError("scaled_upper_gamma: x must be non-negative");
  if (x == 0.0) return std::tgamma(a);
  if (x < a + 1.0) {
    double ap = a;
    double del = 1.0 / a;
    double sum = del;
    for (int n = 0; n < 1000; ++n) {
      ap += 1.0;
      del *= x / ap;
      sum += del;
      if (std::abs(del) < std::abs(sum) * kEps) break;
    }
    // e^x (Gamma(a) - gamma(a, x)) with gamma(a, x) = e^{-x} x^a sum.
    return std::exp(x) * std::tgamma(a) - std::pow(x, a) * sum;
  }
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 1000; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  return std::pow(x, a) * h;
}

}  // namespace roughhedge
