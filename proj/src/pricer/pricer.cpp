#include "roughhedge/pricer/pricer.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "roughhedge/mathkit/errors.hpp"
#include "roughhedge/mathkit/quadrature.hpp"
#include "roughhedge/mathkit/special.hpp"

namespace roughhedge {

namespace {

constexpr double kTauFloor = 1e-12;
constexpr double kInvSqrt2Pi = 0.5 * std::numbers::inv_sqrtpi * std::numbers::sqrt2;

void check_time(const OptionSpec& opt, double t) {
  if (!(t >= 0.0) || t > opt.maturity) throw DomainError("time must lie in [0, T]");
}

// E[h(x e^{s z - s^2/2}) He_n(z)] for n = 0..n_max, by Gauss-Hermite.
Eigen::VectorXd hermite_moments(const OptionSpec& opt, double x, double s, int n_max) {
  const GaussRule& r = gauss_hermite_rule(kCustomPayoffOrder);
  Eigen::VectorXd m = Eigen::VectorXd::Zero(n_max + 1);
  for (int i = 0; i < r.nodes.size(); ++i) {
    const double z = r.nodes(i);
    const double h = opt.payoff_at(x * std::exp(s * z - 0.5 * s * s));
    double he_prev = 0.0, he = 1.0;
    for (int n = 0; n <= n_max; ++n) {
      m(n) += r.weights(i) * h * he;
      const double next = z * he - n * he_prev;
      he_prev = he;
      he = next;
    }
  }
  return m;
}

// n-th derivative in y = log x of Q0.
double log_derivative(const Eigen::VectorXd& moments, double s, int n) { return moments(n) / std::pow(s, n); }

}  // namespace

OptionSpec OptionSpec::custom(double strike, double maturity, Eigen::VectorXd log_moneyness, Eigen::VectorXd values) {
  OptionSpec o{PayoffKind::custom, strike, maturity, std::move(log_moneyness), std::move(values)};
  o.validate();
  return o;
}

void OptionSpec::validate() const {
  if (!(strike > 0.0) || !std::isfinite(strike)) throw ValidationError("OptionSpec: strike must be positive");
  if (!(maturity > 0.0) || !std::isfinite(maturity)) throw ValidationError("OptionSpec: maturity must be positive");
  if (payoff == PayoffKind::custom) {
    if (log_moneyness.size() < 2 || log_moneyness.size() != payoff_values.size())
      throw ValidationError("OptionSpec: custom payoff needs matching grids of at least two points");
    for (Eigen::Index i = 1; i < log_moneyness.size(); ++i)
      if (!(log_moneyness(i) > log_moneyness(i - 1)))
        throw ValidationError("OptionSpec: custom log-moneyness grid must be strictly increasing");
    if (!payoff_values.allFinite()) throw ValidationError("OptionSpec: custom payoff values must be finite");
  }
}

double OptionSpec::payoff_at(double x) const {
  switch (payoff) {
    case PayoffKind::call: return std::max(x - strike, 0.0);
    case PayoffKind::put: return std::max(strike - x, 0.0);
    case PayoffKind::custom: break;
  }
  const double y = std::log(x / strike);
  const Eigen::Index n = log_moneyness.size();
  if (y <= log_moneyness(0)) return payoff_values(0);
  if (y >= log_moneyness(n - 1)) return payoff_values(n - 1);
  const double* begin = log_moneyness.data();
  const Eigen::Index i = std::upper_bound(begin, begin + n, y) - begin;
  const double w = (y - log_moneyness(i - 1)) / (log_moneyness(i) - log_moneyness(i - 1));
  return (1.0 - w) * payoff_values(i - 1) + w * payoff_values(i);
}

bool OptionSpec::convex() const {
  if (payoff != PayoffKind::custom) return true;
  // Convexity in x of the piecewise-linear interpolant through (K e^y, h).
  const Eigen::Index n = log_moneyness.size();
  for (Eigen::Index i = 1; i + 1 < n; ++i) {
    const double x0 = strike * std::exp(log_moneyness(i - 1));
    const double x1 = strike * std::exp(log_moneyness(i));
    const double x2 = strike * std::exp(log_moneyness(i + 1));
    const double s01 = (payoff_values(i) - payoff_values(i - 1)) / (x1 - x0);
    const double s12 = (payoff_values(i + 1) - payoff_values(i)) / (x2 - x1);
    if (s12 < s01 - 1e-12 * (std::abs(s01) + std::abs(s12))) return false;
  }
  return true;
}

BsPoint BsPoint::make(const OptionSpec& opt, double sigma, double t, double x) {
  if (!(x > 0.0)) throw DomainError("BsPoint: x must be positive");
  if (!(sigma > 0.0)) throw DomainError("BsPoint: sigma must be positive");
  check_time(opt, t);
  BsPoint p;
  p.t = t;
  p.x = x;
  p.tau = sigma * sigma * (opt.maturity - t);
  if (p.tau < kTauFloor) throw DomainError("BsPoint: tau below 1e-12 (at or too close to expiry)");
  const double st = std::sqrt(p.tau);
  p.d_minus = std::log(x / opt.strike) / st - 0.5 * st;
  p.d_plus = p.d_minus + st;
  return p;
}

MarketParams MarketParams::from_raw(double sigma_bar, double epsilon, double rho, double d_bar, double gamma_bar) {
  MarketParams mp;
  mp.sigma_bar = sigma_bar;
  mp.d_param = std::sqrt(epsilon) * rho * d_bar;
  mp.gamma_param = std::sqrt(epsilon) * gamma_bar;
  mp.epsilon = epsilon;
  mp.rho = rho;
  mp.d_bar = d_bar;
  mp.gamma_bar = gamma_bar;
  return mp;
}

double MarketParams::hedging_parameter(double strike) const {
  return d_param * strike * kInvSqrt2Pi / (sigma_bar * sigma_bar);
}

double MarketParams::rho_bar() const { return gamma_param > 0.0 ? d_param / (sigma_bar * gamma_param) : 0.0; }

void MarketParams::validate() const {
  if (!(sigma_bar > 0.0)) throw ValidationError("MarketParams: sigma_bar must be positive");
  if (!(gamma_param >= 0.0)) throw ValidationError("MarketParams: Gamma must be non-negative");
  if (!std::isfinite(d_param)) throw ValidationError("MarketParams: D must be finite");
  if (gamma_param > 0.0 && std::abs(rho_bar()) > 1.0 + 1e-12)
    throw ValidationError("MarketParams: |D / (sigma_bar Gamma)| exceeds 1");
  if (epsilon && rho && d_bar) {
    const double expect = std::sqrt(*epsilon) * *rho * *d_bar;
    if (std::abs(expect - d_param) > 1e-12 * std::max(1.0, std::abs(expect)))
      throw ValidationError("MarketParams: D differs from sqrt(eps) rho d_bar");
  }
  if (epsilon && gamma_bar) {
    const double expect = std::sqrt(*epsilon) * *gamma_bar;
    if (std::abs(expect - gamma_param) > 1e-12 * std::max(1.0, expect))
      throw ValidationError("MarketParams: Gamma differs from sqrt(eps) gamma_bar");
  }
}

double bs_price(const OptionSpec& opt, double t, double x, double sigma) {
  if (!(x > 0.0)) throw DomainError("bs_price: x must be positive");
  if (!(sigma > 0.0)) throw DomainError("bs_price: sigma must be positive");
  check_time(opt, t);
  if (t == opt.maturity) return opt.payoff_at(x);
  const double tau = sigma * sigma * (opt.maturity - t);
  if (opt.payoff == PayoffKind::custom) return hermite_moments(opt, x, std::sqrt(tau), 0)(0);
  const double st = std::sqrt(tau);
  const double dm = std::log(x / opt.strike) / st - 0.5 * st;
  const double dp = dm + st;
  if (opt.payoff == PayoffKind::call) return x * normal_cdf(dp) - opt.strike * normal_cdf(dm);
  return opt.strike * normal_cdf(-dm) - x * normal_cdf(-dp);
}

double bs_delta(const OptionSpec& opt, double t, double x, double sigma) {
  const BsPoint p = BsPoint::make(opt, sigma, t, x);
  switch (opt.payoff) {
    case PayoffKind::call: return normal_cdf(p.d_plus);
    case PayoffKind::put: return normal_cdf(p.d_plus) - 1.0;
    case PayoffKind::custom: break;
  }
  const double s = std::sqrt(p.tau);
  return log_derivative(hermite_moments(opt, x, s, 1), s, 1) / x;
}

double bs_vega(const OptionSpec& opt, double t, double x, double sigma) {
  const BsPoint p = BsPoint::make(opt, sigma, t, x);
  return sigma * (opt.maturity - t) * greek_ladder(opt, p, 0);
}

double greek_ladder(const OptionSpec& opt, const BsPoint& point, int order) {
  if (order < 0 || order > 2) throw DomainError("greek_ladder: order must be 0, 1 or 2");
  if (point.tau < kTauFloor) throw DomainError("greek_ladder: tau below 1e-12");
  const double d = point.d_minus;
  const double g = opt.strike * kInvSqrt2Pi * std::exp(-0.5 * d * d);
  if (opt.payoff != PayoffKind::custom) {
    // Calls and puts differ by x - K, which the operator annihilates.
    switch (order) {
      case 0: return g / std::sqrt(point.tau);
      case 1: return -g * d / point.tau;
      default: return g * (d * d - 1.0) / (point.tau * std::sqrt(point.tau));
    }
  }
  const double s = std::sqrt(point.tau);
  const Eigen::VectorXd m = hermite_moments(opt, point.x, s, order + 2);
  // x^2 d^2/dx^2 = d^2/dy^2 - d/dy and x d/dx = d/dy in y = log x.
  return log_derivative(m, s, order + 2) - log_derivative(m, s, order + 1);
}

double corrected_price(const OptionSpec& opt, const MarketParams& mp, double t, double x) {
  check_time(opt, t);
  if (t == opt.maturity) return opt.payoff_at(x);
  const double q0 = bs_price(opt, t, x, mp.sigma_bar);
  if (mp.d_param == 0.0) return q0;
  const BsPoint p = BsPoint::make(opt, mp.sigma_bar, t, x);
  return q0 + mp.d_param * (opt.maturity - t) * greek_ladder(opt, p, 1);
}

double corrected_delta(const OptionSpec& opt, const MarketParams& mp, double t, double x) {
  const double d0 = bs_delta(opt, t, x, mp.sigma_bar);
  if (mp.d_param == 0.0) return d0;
  const BsPoint p = BsPoint::make(opt, mp.sigma_bar, t, x);
  // d/dx of the ladder at order 1 is the order-2 ladder over x.
  return d0 + mp.d_param * (opt.maturity - t) * greek_ladder(opt, p, 2) / x;
}

double implied_vol(const OptionSpec& opt, double t, double x, double target_price) {
  check_time(opt, t);
  if (t == opt.maturity) throw DomainError("implied_vol: undefined at expiry");
  if (!std::isfinite(target_price)) throw DomainError("implied_vol: target price must be finite");
  const double k = opt.strike;
  if (opt.payoff == PayoffKind::call) {
    if (!(target_price > std::max(x - k, 0.0) && target_price < x))
      throw DomainError("implied_vol: call price outside the no-arbitrage band");
  } else if (opt.payoff == PayoffKind::put) {
    if (!(target_price > std::max(k - x, 0.0) && target_price < k))
      throw DomainError("implied_vol: put price outside the no-arbitrage band");
  }
  double lo = 1e-6, hi = 5.0;
  const double f_lo = bs_price(opt, t, x, lo) - target_price;
  double f_hi = bs_price(opt, t, x, hi) - target_price;
  if (opt.payoff == PayoffKind::custom && f_lo <= 0.0 && f_hi < 0.0) {
    // A payoff that is flat beyond its grid loses value at large sigma, so
    // bracket on the increasing branch: first log-spaced sigma above target.
    constexpr int kScan = 64;
    double prev = lo;
    for (int i = 1; i <= kScan; ++i) {
      const double s = lo * std::pow(hi / lo, static_cast<double>(i) / kScan);
      if (bs_price(opt, t, x, s) - target_price >= 0.0) {
        lo = prev;
        hi = s;
        f_hi = 0.0;
        break;
      }
      prev = s;
    }
  }
  if (f_lo > 0.0 || f_hi < 0.0) {
    if (opt.payoff == PayoffKind::custom) throw DomainError("implied_vol: target outside the attainable price range");
    throw NumericalError("implied_vol: target not bracketed by [1e-6, 5]", f_lo > 0.0 ? lo : hi, hi - lo);
  }
  const double tol = 1e-12 * k;
  const double horizon = opt.maturity - t;
  double sigma = std::clamp(std::sqrt(2.0 * std::abs(std::log(x / k)) / horizon), 0.1, 2.0);
  if (!(sigma > lo && sigma < hi)) sigma = 0.5 * (lo + hi);
  for (int it = 0; it < 100; ++it) {
    const double f = bs_price(opt, t, x, sigma) - target_price;
    if (std::abs(f) <= tol) return sigma;
    if (f > 0.0)
      hi = sigma;
    else
      lo = sigma;
    const double vega = bs_vega(opt, t, x, sigma);
    double next = vega > 0.0 ? sigma - f / vega : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (hi - lo < 1e-15 * hi) return next;
    sigma = next;
  }
  throw NumericalError("implied_vol: no convergence after 100 iterations", 0.5 * (lo + hi), hi - lo);
}

}  // namespace roughhedge
