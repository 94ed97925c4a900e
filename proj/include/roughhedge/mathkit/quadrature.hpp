#pragma once

#include <functional>
#include <limits>

#include <Eigen/Dense>

namespace roughhedge {

enum class QuadScheme { gauss_hermite, gauss_legendre, adaptive };

/// Substitution applied on a finite interval [a, b] before integrating.
/// sqrt_right: s = b - (b-a)u^2 removes a 1/sqrt(b - s) singularity.
/// sqrt_left:  s = a + (b-a)u^2 removes a 1/sqrt(s - a) singularity.
enum class EndpointMap { none, sqrt_left, sqrt_right };

struct QuadSpec {
  QuadScheme scheme = QuadScheme::adaptive;
  int order = 32;
  double abs_tol = 1e-13;
  double rel_tol = 1e-11;
  EndpointMap endpoint_map = EndpointMap::none;
  long max_nodes = 400000;

  /// Throws ValidationError when order < 2, tolerances are negative, or
  /// both tolerances are zero for the adaptive scheme.
  void validate() const;
};

/// Integration domain [lo, hi]; hi may be +infinity (half-line).
struct Interval {
  double lo = 0.0;
  double hi = std::numeric_limits<double>::infinity();

  bool half_line() const { return hi == std::numeric_limits<double>::infinity(); }
};

struct BivariateGaussian {
  double correlation = 0.0;
};

struct QuadResult {
  double value = 0.0;
  double error = 0.0;
  long evaluations = 0;
};

/// Nodes and weights of a Gauss rule.
struct GaussRule {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
};

/// Probabilists' Gauss-Hermite rule: sum_i w_i f(z_i) approximates E[f(Z)],
/// Z ~ N(0,1). Weights sum to one. Rules are cached and shared.
const GaussRule& gauss_hermite_rule(int order);

/// Gauss-Legendre rule on [-1, 1].
const GaussRule& gauss_legendre_rule(int order);

using Integrand1d = std::function<double(double)>;
using Integrand2d = std::function<double(double, double)>;

/// Integrates f over dom.
///
/// gauss_legendre: fixed-order rule after the endpoint map (half-lines use
/// t = lo + u/(1-u)). adaptive: globally adaptive Gauss-Kronrod 7/15 with the
/// same maps; throws NumericalError carrying the best estimate and error
/// bound once max_nodes evaluations are spent. gauss_hermite: dom is ignored
/// and the result is E[f(Z)] with Z standard normal.
QuadResult integrate_1d_detailed(const Integrand1d& f, Interval dom, const QuadSpec& spec);

inline double integrate_1d(const Integrand1d& f, Interval dom, const QuadSpec& spec) {
  return integrate_1d_detailed(f, dom, spec).value;
}

/// E[f(Z, Z')] for a standard bivariate normal pair with the given correlation.
///
/// The Gaussian density lives in the weights; the caller passes bare f.
/// gauss_hermite uses a tensor rule of the given order; adaptive doubles the
/// order until two successive estimates agree to tolerance.
QuadResult integrate_gauss_2d_detailed(const Integrand2d& f, BivariateGaussian corr, const QuadSpec& spec);

inline double integrate_gauss_2d(const Integrand2d& f, BivariateGaussian corr, const QuadSpec& spec) {
  return integrate_gauss_2d_detailed(f, corr, spec).value;
}

}  // namespace roughhedge
