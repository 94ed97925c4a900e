#include "roughhedge/asymptotics/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>

#include "roughhedge/mathkit/errors.hpp"
#include "roughhedge/mathkit/format.hpp"
#include "roughhedge/mathkit/special.hpp"
#include "roughhedge/volsim/kernel.hpp"
#include "roughhedge/volsim/market.hpp"

namespace roughhedge {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kChebyshevNodes = 48;

// Chebyshev expansion on [-1, 1] built from values at the first-kind nodes.
class ChebyshevSeries {
 public:
  template <typename Fn>
  static ChebyshevSeries fit(Fn f, int n) {
    Eigen::VectorXd values(n);
    for (int j = 0; j < n; ++j) values[j] = f(std::cos(kPi * (j + 0.5) / n));
    ChebyshevSeries s;
    s.c_.resize(n);
    for (int k = 0; k < n; ++k) {
      double acc = 0.0;
      for (int j = 0; j < n; ++j) acc += values[j] * std::cos(kPi * k * (j + 0.5) / n);
      s.c_[k] = 2.0 * acc / n;
    }
    s.c_[0] *= 0.5;
    return s;
  }

  double operator()(double x) const {
    double b1 = 0.0;
    double b2 = 0.0;
    for (Eigen::Index k = c_.size() - 1; k >= 1; --k) {
      const double b0 = 2.0 * x * b1 - b2 + c_[k];
      b2 = b1;
      b1 = b0;
    }
    return x * b1 - b2 + c_[0];
  }

  // Antiderivative vanishing at x = 0.
  ChebyshevSeries integral() const {
    const Eigen::Index n = c_.size();
    ChebyshevSeries s;
    s.c_ = Eigen::VectorXd::Zero(n + 1);
    auto coef = [&](Eigen::Index k) { return k < n ? (k == 0 ? 2.0 * c_[0] : c_[k]) : 0.0; };
    for (Eigen::Index k = 1; k <= n; ++k) s.c_[k] = (coef(k - 1) - coef(k + 1)) / (2.0 * k);
    s.c_[0] = -s(0.0);
    return s;
  }

 private:
  Eigen::VectorXd c_;
};

QuadSpec gauss_spec(const QuadSpec& spec) {
  QuadSpec g = spec;
  g.scheme = QuadScheme::gauss_hermite;
  return g;
}

QuadSpec outer_spec(const QuadSpec& spec) {
  QuadSpec o = spec;
  o.scheme = QuadScheme::adaptive;
  o.endpoint_map = EndpointMap::none;
  return o;
}

// E[F(sigma_z Z) FF'(sigma_z Z')] as a function of the correlation.
ChebyshevSeries leverage_expectation(const VolModel& model, const QuadSpec& spec) {
  const QuadSpec g = gauss_spec(spec);
  auto f = [&](double z, double zp) {
    const double a = model.sigma_z * z;
    const double b = model.sigma_z * zp;
    return model.vol(a) * model.vol(b) * model.vol_derivative(b);
  };
  return ChebyshevSeries::fit([&](double c) { return integrate_gauss_2d(f, {c}, g); }, kChebyshevNodes);
}

// E[FF'(sigma_z Z) FF'(sigma_z Z')] as a function of the correlation.
ChebyshevSeries vol_of_vol_expectation(const VolModel& model, const QuadSpec& spec) {
  const QuadSpec g = gauss_spec(spec);
  auto ffp = [&](double z) {
    const double a = model.sigma_z * z;
    return model.vol(a) * model.vol_derivative(a);
  };
  auto f = [&](double z, double zp) { return ffp(z) * ffp(zp); };
  return ChebyshevSeries::fit([&](double c) { return integrate_gauss_2d(f, {c}, g); }, kChebyshevNodes);
}

// int_0^inf g(s) ds where g may behave like s^alpha (alpha > -1) at the
// origin: s = r^p on [0, 1], half-line rule beyond.
template <typename G>
double integrate_half_line_singular(G g, double alpha, const QuadSpec& spec) {
  const double p = std::max(1.0, std::ceil(2.0 / (1.0 + alpha)));
  auto head = [&](double r) {
    if (r <= 0.0) return 0.0;
    const double rp1 = std::pow(r, p - 1.0);
    return g(rp1 * r) * p * rp1;
  };
  const QuadSpec o = outer_spec(spec);
  return integrate_1d(head, {0.0, 1.0}, o) + integrate_1d(g, {1.0}, o);
}

}  // namespace

double dbar_general(const VolModel& model, const QuadSpec& spec) {
  model.validate();
  spec.validate();
  if (model.omega == 0.0) return 0.0;
  const KernelSpec& k = model.kernel;
  const ChebyshevSeries g1 = leverage_expectation(model, spec);
  const double g0 = g1(0.0);
  auto integrand = [&](double s) {
    if (s <= 0.0) return 0.0;
    return (g1(covariance_cz(k, s)) - g0) * kernel_eval(k, s);
  };
  const double body = integrate_half_line_singular(integrand, k.hurst - 0.5, spec);
  return model.sigma_z * (g0 * kernel_mass(k) + body);
}

double gammabar_general(const VolModel& model, const QuadSpec& spec) {
  model.validate();
  spec.validate();
  if (model.omega == 0.0) return 0.0;
  const KernelSpec& k = model.kernel;
  const ChebyshevSeries g2 = vol_of_vol_expectation(model, spec);
  const double g0 = g2(0.0);
  const ChebyshevSeries h2 = g2.integral();
  auto integrand = [&](double u) {
    const double x = covariance_cz(k, u);
    return h2(x) - g0 * x;
  };
  const double mass = kernel_mass(k);
  const double lag = integrate_1d(integrand, {0.0}, outer_spec(spec));
  const double gamma2 = model.sigma_z * model.sigma_z * (g0 * mass * mass + 2.0 * lag);
  if (gamma2 < 0.0) throw NumericalError("gammabar_general: negative Gamma_bar^2", gamma2, std::abs(gamma2));
  return std::sqrt(gamma2);
}

EffectiveParams effective_params(const VolModel& model, const QuadSpec& spec) {
  EffectiveParams ep;
  ep.d_bar = dbar_general(model, spec);
  ep.gamma_bar = gammabar_general(model, spec);
  const double sb = model.sigma_bar;
  ep.alpha = ep.d_bar / (sb * sb * sb);
  ep.beta = ep.gamma_bar / (sb * sb);
  ep.rho_bar = ep.gamma_bar > 0.0 ? model.rho * ep.d_bar / (sb * ep.gamma_bar) : 0.0;
  return ep;
}

MarketParams market_params(const VolModel& model, const EffectiveParams& ep) {
  return MarketParams::from_raw(model.sigma_bar, model.kernel.epsilon, model.rho, ep.d_bar, ep.gamma_bar);
}

ExpOuConstants expou_alpha_beta(double omega) {
  if (!(omega >= 0.0)) throw DomainError("expou_alpha_beta: omega must be non-negative");
  ExpOuConstants r;
  if (omega == 0.0) return r;
  const double w2 = omega * omega;
  r.alpha = std::exp(-0.5 * w2) * std::expm1(2.0 * w2) / (std::numbers::sqrt2 * omega);
  const double beta2 = 0.5 * exp_integral_ei_entire(4.0 * w2);
  r.ok = std::isfinite(r.alpha) && std::isfinite(beta2) && beta2 >= 0.0;
  r.beta = r.ok ? std::sqrt(beta2) : 0.0;
  return r;
}

MomentValues moment_functions(double s, double d) {
  if (!(s >= 0.0 && s <= 1.0)) throw DomainError("moment_functions: s must lie in [0, 1]");
  const double a = 1.0 - s;
  const double b = 1.0 + s;
  const double d2 = d * d;
  MomentValues m;
  m.f0 = std::sqrt(a / b);
  m.f2 = d2 * std::sqrt(a * a * a / std::pow(b, 5)) + s * std::sqrt(a / (b * b * b));
  m.f4 = d2 * d2 * std::sqrt(std::pow(a, 5) / std::pow(b, 9)) + 6.0 * d2 * s * std::sqrt(a * a * a / std::pow(b, 7)) +
         3.0 * s * s * std::sqrt(a / std::pow(b, 5));
  return m;
}

CostCell cost_cell(double theta, double d, const QuadSpec& spec) {
  if (!(theta >= 0.0 && theta <= 1.0)) throw DomainError("cost_cell: theta must lie in [0, 1]");
  spec.validate();
  CostCell c;
  const double d2 = d * d;
  c.g = -d * std::exp(-0.5 * d2) / std::sqrt(2.0 * kPi);
  if (theta == 0.0) return c;

  QuadSpec q = outer_spec(spec);
  q.endpoint_map = EndpointMap::sqrt_right;
  const Interval dom{0.0, theta};
  auto weight = [&](double s) { return std::exp(-d2 / (1.0 + s)); };

  c.v = integrate_1d([&](double s) { return weight(s) / std::sqrt((1.0 - s) * (1.0 + s)); }, dom, q) / (2.0 * kPi);
  c.w_bs = -c.v;
  c.w_h = integrate_1d(
              [&](double s) {
                if (s >= 1.0) return 0.0;
                const MomentValues m = moment_functions(s, d);
                const double r = 1.0 - s;
                return weight(s) * (theta - s) / (r * r) * (2.0 * m.f2 - m.f0);
              },
              dom, q) /
              kPi -
          theta * theta * d2 * std::exp(-d2) / (2.0 * kPi);
  c.w_htilde = integrate_1d(
                   [&](double s) {
                     if (s >= 1.0) return 0.0;
                     const MomentValues m = moment_functions(s, d);
                     return weight(s) * (m.f4 - m.f0) / (1.0 - s);
                   },
                   dom, q) /
               (2.0 * kPi);
  return c;
}

CostSurface cost_surfaces(const Eigen::Ref<const Eigen::VectorXd>& theta_grid,
                          const Eigen::Ref<const Eigen::VectorXd>& dminus_grid, double strike, const QuadSpec& spec,
                          int threads) {
  if (!(strike > 0.0)) throw DomainError("cost_surfaces: strike must be positive");
  for (Eigen::Index i = 0; i < theta_grid.size(); ++i) {
    if (!(theta_grid[i] >= 0.0 && theta_grid[i] <= 1.0)) throw DomainError("cost_surfaces: theta must lie in [0, 1]");
  }
  spec.validate();
  CostSurface s;
  s.strike = strike;
  s.theta = theta_grid;
  s.d_minus = dminus_grid;
  const Eigen::Index nt = theta_grid.size();
  const Eigen::Index nd = dminus_grid.size();
  s.g.resize(nt, nd);
  s.v.resize(nt, nd);
  s.w_h.resize(nt, nd);
  s.w_bs.resize(nt, nd);
  s.w_htilde.resize(nt, nd);
  std::vector<std::string> errors(static_cast<std::size_t>(nt * nd));

  const double k1 = strike;
  const double k2 = strike * strike;
  parallel_for(nt * nd, threads, [&](long idx, int) {
    const Eigen::Index i = idx / nd;
    const Eigen::Index j = idx % nd;
    CostCell c;
    try {
      c = cost_cell(s.theta[i], s.d_minus[j], spec);
    } catch (const NumericalError& e) {
      errors[static_cast<std::size_t>(idx)] = e.what();
      c.g = -s.d_minus[j] * std::exp(-0.5 * s.d_minus[j] * s.d_minus[j]) / std::sqrt(2.0 * kPi);
      c.v = c.w_h = c.w_htilde = std::numeric_limits<double>::quiet_NaN();
    }
    s.g(i, j) = k1 * c.g;
    s.v(i, j) = k2 * c.v;
    s.w_h(i, j) = k2 * c.w_h;
    s.w_htilde(i, j) = k2 * c.w_htilde;
    s.w_bs(i, j) = -s.v(i, j);
  });
  for (Eigen::Index idx = 0; idx < nt * nd; ++idx) {
    const std::string& e = errors[static_cast<std::size_t>(idx)];
    if (!e.empty()) s.failures.push_back({s.theta[idx / nd], s.d_minus[idx % nd], e});
  }
  return s;
}

void write_cost_surface_csv(const CostSurface& s, std::ostream& out) {
  out << "theta,d_minus,g,v,w_h,w_bs,w_htilde\n";
  for (Eigen::Index i = 0; i < s.theta.size(); ++i) {
    for (Eigen::Index j = 0; j < s.d_minus.size(); ++j) {
      out << format_double(s.theta[i]) << ',' << format_double(s.d_minus[j]) << ',' << format_double(s.g(i, j))
          << ',' << format_double(s.v(i, j)) << ',' << format_double(s.w_h(i, j)) << ','
          << format_double(s.w_bs(i, j)) << ',' << format_double(s.w_htilde(i, j)) << '\n';
    }
  }
}

CostStats predicted_cost_stats(SchemeKind kind, const OptionSpec& opt, const MarketParams& mp, double x0,
                               double exercise_time, const QuadSpec& spec) {
  if (opt.payoff == PayoffKind::custom) throw DomainError("predicted_cost_stats: closed forms cover calls and puts");
  if (kind == SchemeKind::custom_da) throw DomainError("predicted_cost_stats: no closed form for custom schemes");
  if (!(exercise_time > 0.0 && exercise_time <= opt.maturity)) {
    throw DomainError("predicted_cost_stats: exercise time must lie in (0, T]");
  }
  const BsPoint p0 = BsPoint::make(opt, mp.sigma_bar, 0.0, x0);
  const CostCell c = cost_cell(exercise_time / opt.maturity, p0.d_minus, spec);
  const double k = opt.strike;
  const double sb2 = mp.sigma_bar * mp.sigma_bar;
  const double gv = mp.gamma_param * mp.gamma_param / sb2 * k * k * c.v;
  const double dd = mp.d_param * mp.d_param / (sb2 * sb2) * k * k;
  CostStats r;
  switch (kind) {
    case SchemeKind::HW:
      r.variance = gv;
      break;
    case SchemeKind::BS:
      r.variance = gv + dd * c.w_bs;
      break;
    case SchemeKind::H:
      r.mean = (exercise_time / opt.maturity - 1.0) * mp.d_param / sb2 * k * c.g;
      r.variance = gv + dd * c.w_h;
      break;
    case SchemeKind::H_tilde:
      r.variance = gv + dd * c.w_htilde;
      break;
    case SchemeKind::custom_da:
      break;
  }
  return r;
}

GenericVariance generic_variance(const OptionSpec& opt, double sigma_bar, double x0, double exercise_time,
                                 const QuadSpec& spec) {
  opt.validate();
  if (!(exercise_time > 0.0 && exercise_time < opt.maturity)) {
    throw DomainError("generic_variance: exercise time must lie in (0, T)");
  }
  const GaussRule& rule = gauss_hermite_rule(std::max(spec.order, 64));
  const double sb2 = sigma_bar * sigma_bar;
  const double t = exercise_time;
  auto expect = [&](double s, auto&& fn) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < rule.nodes.size(); ++i) {
      const double x = x0 * std::exp(sigma_bar * std::sqrt(s) * rule.nodes[i] - 0.5 * sb2 * s);
      acc += rule.weights[i] * fn(BsPoint::make(opt, sigma_bar, s, x));
    }
    return acc;
  };
  const QuadSpec q = outer_spec(spec);
  GenericVariance r;
  r.v = sb2 * integrate_1d(
                  [&](double s) {
                    return expect(s, [&](const BsPoint& p) {
                      const double l0 = greek_ladder(opt, p, 0);
                      return l0 * l0;
                    });
                  },
                  {0.0, t}, q);
  const double l1_0 = greek_ladder(opt, BsPoint::make(opt, sigma_bar, 0.0, x0), 1);
  const double cross = integrate_1d(
      [&](double s) {
        return (t - s) * expect(s, [&](const BsPoint& p) {
                 const double l0 = greek_ladder(opt, p, 0);
                 const double l1 = greek_ladder(opt, p, 1);
                 const double l2 = greek_ladder(opt, p, 2);
                 return l1 * l1 + l2 * l0;
               });
      },
      {0.0, t}, q);
  r.w_h = sb2 * sb2 * (2.0 * cross - t * t * l1_0 * l1_0);
  return r;
}

}  // namespace roughhedge
