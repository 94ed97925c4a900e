#pragma once

#include <optional>

#include <Eigen/Dense>

namespace roughhedge {

enum class PayoffKind { call, put, custom };

/// European payoff h(X_T). A custom payoff is sampled as h(K e^y) on an
/// ascending log-moneyness grid y and interpolated linearly (flat outside).
struct OptionSpec {
  PayoffKind payoff = PayoffKind::call;
  double strike = 1.0;
  double maturity = 1.0;
  Eigen::VectorXd log_moneyness;
  Eigen::VectorXd payoff_values;

  static OptionSpec call(double strike, double maturity) { return {PayoffKind::call, strike, maturity, {}, {}}; }
  static OptionSpec put(double strike, double maturity) { return {PayoffKind::put, strike, maturity, {}, {}}; }
  static OptionSpec custom(double strike, double maturity, Eigen::VectorXd log_moneyness, Eigen::VectorXd values);

  double payoff_at(double x) const;

  /// Throws ValidationError on a non-positive strike or maturity, or a
  /// malformed custom grid.
  void validate() const;

  /// True when the sampled custom payoff is convex on its grid (always true
  /// for call and put).
  bool convex() const;
};

/// Black-Scholes coordinates at volatility sigma: tau = sigma^2 (T - t),
/// d_pm = log(x/K)/sqrt(tau) +- sqrt(tau)/2.
struct BsPoint {
  double t = 0.0;
  double x = 1.0;
  double tau = 0.0;
  double d_minus = 0.0;
  double d_plus = 0.0;

  /// Throws DomainError when tau < 1e-12 or x <= 0.
  static BsPoint make(const OptionSpec& opt, double sigma, double t, double x);
};

/// Effective market parameters (sigma_bar, D, Gamma), optionally with the raw
/// components they came from.
struct MarketParams {
  double sigma_bar = 0.5;
  double d_param = 0.0;
  double gamma_param = 0.0;
  std::optional<double> epsilon;
  std::optional<double> rho;
  std::optional<double> d_bar;
  std::optional<double> gamma_bar;

  /// D = sqrt(eps) rho d_bar, Gamma = sqrt(eps) gamma_bar.
  static MarketParams from_raw(double sigma_bar, double epsilon, double rho, double d_bar, double gamma_bar);

  /// Hedging parameter D K / (sqrt(2 pi) sigma_bar^2).
  double hedging_parameter(double strike) const;

  /// rho_bar = D / (sigma_bar Gamma), 0 when Gamma = 0.
  double rho_bar() const;

  /// Checks sigma_bar > 0, Gamma >= 0, |D / (sigma_bar Gamma)| <= 1 and the
  /// raw-component consistency. Throws ValidationError.
  void validate() const;
};

/// Q0(t, x; sigma). At t = T returns the payoff.
double bs_price(const OptionSpec& opt, double t, double x, double sigma);

/// dQ0/dx.
double bs_delta(const OptionSpec& opt, double t, double x, double sigma);

/// dQ0/dsigma.
double bs_vega(const OptionSpec& opt, double t, double x, double sigma);

/// (x d/dx)^j (x^2 d^2/dx^2) Q0 at the point, j in {0, 1, 2}. Calls and puts
/// share the ladder; custom payoffs use Hermite-weighted quadrature.
double greek_ladder(const OptionSpec& opt, const BsPoint& point, int order);

/// P(t, x) = Q0(t, x; sigma_bar) + D (T - t) (x d/dx)(x^2 d^2/dx^2) Q0.
double corrected_price(const OptionSpec& opt, const MarketParams& mp, double t, double x);

/// dP/dx.
double corrected_delta(const OptionSpec& opt, const MarketParams& mp, double t, double x);

/// sigma with bs_price(sigma) = target. Newton with bisection safeguard on
/// [1e-6, 5]. Throws DomainError outside the no-arbitrage band and
/// NumericalError (best bracket midpoint, bracket width) on non-convergence.
double implied_vol(const OptionSpec& opt, double t, double x, double target_price);

/// Gauss-Hermite order used for custom payoffs.
inline constexpr int kCustomPayoffOrder = 64;

}  // namespace roughhedge
