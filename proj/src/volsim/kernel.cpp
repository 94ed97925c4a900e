#include "roughhedge/volsim/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "roughhedge/mathkit/errors.hpp"
#include "roughhedge/mathkit/quadrature.hpp"
#include "roughhedge/mathkit/special.hpp"

namespace roughhedge {

namespace {

constexpr double kLargeLag = 40.0;

double fou_constant(double hurst) {
  return std::sqrt(2.0 * std::sin(std::numbers::pi * hurst)) / std::tgamma(hurst + 0.5);
}

QuadSpec kernel_quad() {
  QuadSpec q;
  q.abs_tol = 1e-15;
  q.rel_tol = 1e-12;
  q.max_nodes = 2000000;
  return q;
}

// int_0^h g(u) du where g may behave like u^alpha (alpha > -1) at the origin.
// u = h r^p with p (1 + alpha) >= 2 leaves a smooth integrand in r.
template <typename G>
double integrate_power_singular(G g, double h, double alpha) {
  if (h <= 0.0) return 0.0;
  const double p = std::max(1.0, std::ceil(2.0 / (1.0 + alpha)));
  auto mapped = [&](double r) {
    if (r <= 0.0) return 0.0;
    const double rp1 = std::pow(r, p - 1.0);
    return g(h * rp1 * r) * h * p * rp1;
  };
  return integrate_1d(mapped, {0.0, 1.0}, kernel_quad());
}

}  // namespace

void KernelSpec::validate() const {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw ValidationError("KernelSpec: epsilon must be positive");
  if (kind == KernelKind::standard_ou) {
    if (hurst != 0.5) throw ValidationError("KernelSpec: standard_ou requires hurst = 1/2");
  } else if (!(hurst > 0.0 && hurst <= 0.5)) {
    throw ValidationError("KernelSpec: hurst must lie in (0, 1/2]");
  }
}

double kernel_eval(const KernelSpec& spec, double t) {
  if (t < 0.0) throw DomainError("kernel_eval: t must be non-negative");
  if (spec.markovian()) return std::numbers::sqrt2 * std::exp(-t);
  if (t == 0.0) throw DomainError("kernel_eval: fractional kernel is singular at t = 0");
  return fou_constant(spec.hurst) * power_minus_exp_weighted(spec.hurst - 0.5, t);
}

double kernel_eval_scaled(const KernelSpec& spec, double t) {
  return kernel_eval(spec, t / spec.epsilon) / std::sqrt(spec.epsilon);
}

double kernel_primitive(const KernelSpec& spec, double t) {
  if (t < 0.0) throw DomainError("kernel_primitive: t must be non-negative");
  if (spec.markovian()) return std::numbers::sqrt2 * -std::expm1(-t);
  // E' = t^a - E with E(0) = 0 gives int_0^t (u^a - E(u)) du = E(t).
  return fou_constant(spec.hurst) * exp_weighted_power_integral(spec.hurst - 0.5, t);
}

double kernel_mass(const KernelSpec& spec) { return spec.markovian() ? std::numbers::sqrt2 : 0.0; }

double kernel_l2_norm_squared(const KernelSpec& spec) {
  auto k2 = [&](double u) {
    const double k = kernel_eval(spec, u);
    return k * k;
  };
  const double head = integrate_power_singular(k2, 1.0, 2.0 * spec.hurst - 1.0);
  const double tail = integrate_1d(k2, {1.0}, kernel_quad());
  return head + tail;
}

double covariance_cz(const KernelSpec& spec, double s) {
  if (s < 0.0) throw DomainError("covariance_cz: lag must be non-negative");
  if (spec.markovian()) return std::exp(-s);
  if (s == 0.0) return 1.0;
  const double b = 2.0 * spec.hurst;
  const double g = std::tgamma(b + 1.0);
  if (s < kLargeLag) {
    const double upper = scaled_upper_gamma(b + 1.0, s);
    return (0.5 * (upper + std::exp(-s) * g + exp_weighted_power_integral(b, s)) - std::pow(s, b)) / g;
  }
  // Even terms of the two asymptotic series survive; the leading one cancels s^b.
  double term = 1.0;
  double sum = 0.0;
  for (int n = 1; n < 120; ++n) {
    const double next = term * (b - n + 1.0) / s;
    if (n > 2 && std::abs(next) >= std::abs(term)) break;
    term = next;
    if (n % 2 == 0) sum += term;
    if (std::abs(term) < 1e-18 * std::abs(sum)) break;
  }
  return std::pow(s, b) * sum / g;
}

double kernel_cell_product(const KernelSpec& spec, double a, double b, double h) {
  if (a < 0.0 || b < 0.0 || h < 0.0) throw DomainError("kernel_cell_product: negative argument");
  if (spec.markovian()) return std::exp(-(a + b)) * -std::expm1(-2.0 * h);
  const double alpha = spec.hurst - 0.5;
  // Singular order at u = 0 counts each factor that sits on the origin.
  const double order = (a == 0.0 ? alpha : 0.0) + (b == 0.0 ? alpha : 0.0);
  auto g = [&](double u) {
    if (a + u <= 0.0 || b + u <= 0.0) return 0.0;
    return kernel_eval(spec, a + u) * kernel_eval(spec, b + u);
  };
  return integrate_power_singular(g, h, order);
}

double kernel_overlap(const KernelSpec& spec, double s, double s2) {
  if (s < 0.0 || s2 < 0.0) throw DomainError("kernel_overlap: arguments must be non-negative");
  if (spec.markovian()) return std::exp(-(s + s2));
  const double lo = std::min(s, s2);
  const double lag = std::abs(s - s2);
  // int_lo^inf K(u) K(u + lag) du = C_Z(lag) - int_0^lo K(u) K(u + lag) du.
  return covariance_cz(spec, lag) - kernel_cell_product(spec, 0.0, lag, lo);
}

}  // namespace roughhedge
