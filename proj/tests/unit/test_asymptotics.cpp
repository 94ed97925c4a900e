#include <cmath>
#include <numbers>
#include <sstream>

#include <gtest/gtest.h>

#include "roughhedge/asymptotics/asymptotics.hpp"
#include "roughhedge/mathkit/errors.hpp"
#include "roughhedge/mathkit/quadrature.hpp"

using namespace roughhedge;

namespace {

VolModel expou(double omega, double sigma_bar = 0.5) {
  VolModel m;
  m.kernel = KernelSpec::ou(0.05);
  m.omega = omega;
  m.sigma_bar = sigma_bar;
  m.rho = -0.5;
  return m;
}

// E[D^n e^{-D^2}] e^{d^2/(1+s)}, D = (d + Z sqrt(s)) / sqrt(1 - s), by
// adaptive quadrature over the real line.
double moment_oracle(int n, double s, double d) {
  QuadSpec q;
  q.abs_tol = 1e-15;
  q.rel_tol = 1e-13;
  auto f = [&](double z) {
    const double dd = (d + z * std::sqrt(s)) / std::sqrt(1.0 - s);
    return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi) * std::pow(dd, n) * std::exp(-dd * dd);
  };
  const double right = integrate_1d(f, {0.0}, q);
  const double left = integrate_1d([&](double z) { return f(-z); }, {0.0}, q);
  return std::exp(d * d / (1.0 + s)) * (left + right);
}

}  // namespace

TEST(EffectiveParams, ExpOuClosedFormsMatchQuadrature) {
  for (double w : {0.1, 0.25, 0.5, 1.0}) {
    const VolModel m = expou(w);
    const ExpOuConstants c = expou_alpha_beta(w);
    ASSERT_TRUE(c.ok);
    const EffectiveParams ep = effective_params(m);
    EXPECT_NEAR(ep.alpha / c.alpha, 1.0, 1e-6) << "omega=" << w;
    EXPECT_NEAR(ep.beta / c.beta, 1.0, 1e-6) << "omega=" << w;
    EXPECT_NEAR(ep.d_bar, std::pow(0.5, 3) * ep.alpha, 1e-15);
    EXPECT_NEAR(ep.gamma_bar, 0.25 * ep.beta, 1e-15);
  }
}

TEST(EffectiveParams, ReferenceValues) {
  const EffectiveParams ep = effective_params(expou(0.5));
  EXPECT_NEAR(ep.alpha, 0.80963, 1e-5);
  EXPECT_NEAR(ep.beta, 0.81176, 1e-5);
  const MarketParams mp = market_params(expou(0.5), ep);
  EXPECT_NEAR(mp.d_param, std::sqrt(0.05) * -0.5 * ep.d_bar, 1e-15);
  EXPECT_NEAR(mp.rho_bar(), ep.rho_bar, 1e-12);
  EXPECT_NO_THROW(mp.validate());
}

TEST(EffectiveParams, AlphaOverBetaNearOne) {
  for (double w : {0.1, 0.25, 0.5, 1.0}) {
    const ExpOuConstants c = expou_alpha_beta(w);
    EXPECT_LE(std::abs(c.alpha / c.beta - 1.0), 0.15) << "omega=" << w;
    EXPECT_LE(std::abs(c.alpha), c.beta);
  }
}

TEST(EffectiveParams, SmallOmegaLimit) {
  const ExpOuConstants z = expou_alpha_beta(0.0);
  EXPECT_EQ(z.alpha, 0.0);
  EXPECT_EQ(z.beta, 0.0);
  const double w = 1e-4;
  EXPECT_NEAR(expou_alpha_beta(w).alpha / (std::sqrt(2.0) * w), 1.0, 1e-7);
  EXPECT_NEAR(expou_alpha_beta(w).beta / (std::sqrt(2.0) * w), 1.0, 1e-7);
  EXPECT_FALSE(expou_alpha_beta(30.0).ok);
}

TEST(EffectiveParams, ConstantVolGivesZero) {
  const VolModel m = expou(0.0);
  EXPECT_EQ(dbar_general(m), 0.0);
  EXPECT_EQ(gammabar_general(m), 0.0);
}

TEST(EffectiveParams, RoughKernelStableAcrossOrders) {
  VolModel m = expou(0.25);
  m.kernel = KernelSpec::fou(0.3, 0.05);
  QuadSpec lo, hi;
  lo.order = 32;
  hi.order = 64;
  EXPECT_NEAR(dbar_general(m, lo), dbar_general(m, hi), 1e-6 * std::abs(dbar_general(m, hi)));
  EXPECT_NEAR(gammabar_general(m, lo), gammabar_general(m, hi), 1e-6 * gammabar_general(m, hi));
  EXPECT_GT(dbar_general(m, hi), 0.0);
}

TEST(EffectiveParams, CauchySchwarzBound) {
  for (double w : {0.1, 0.5, 1.0}) {
    const VolModel m = expou(w);
    EXPECT_LE(std::abs(dbar_general(m)), m.sigma_bar * gammabar_general(m) * (1.0 + 1e-12));
  }
  VolModel rough = expou(0.5);
  rough.kernel = KernelSpec::fou(0.1, 0.05);
  const EffectiveParams ep = effective_params(rough);
  EXPECT_LE(std::abs(ep.rho_bar), std::abs(rough.rho));
}

TEST(Moments, BoundaryValues) {
  EXPECT_NEAR(moment_functions(0.0, 0.7).f0, 1.0, 1e-15);
  EXPECT_NEAR(moment_functions(1.0, 0.7).f0, 0.0, 1e-15);
  EXPECT_NEAR(moment_functions(0.0, 1.5).f2, 2.25, 1e-14);
  EXPECT_NEAR(moment_functions(0.0, 1.5).f4, std::pow(1.5, 4), 1e-13);
  EXPECT_NEAR(moment_functions(0.3, 0.0).f0, std::sqrt(0.7 / 1.3), 1e-15);
  EXPECT_THROW(moment_functions(1.2, 0.0), DomainError);
  EXPECT_THROW(moment_functions(-0.1, 0.0), DomainError);
}

TEST(Moments, MatchGaussianOracle) {
  for (int i = 0; i < 10; ++i) {
    const double s = 0.02 + 0.96 * i / 9.0;
    for (int j = 0; j < 10; ++j) {
      const double d = -2.0 + 4.0 * j / 9.0;
      const MomentValues m = moment_functions(s, d);
      EXPECT_NEAR(m.f0, moment_oracle(0, s, d), 1e-8) << s << ' ' << d;
      EXPECT_NEAR(m.f2, moment_oracle(2, s, d), 1e-8) << s << ' ' << d;
      EXPECT_NEAR(m.f4, moment_oracle(4, s, d), 1e-8) << s << ' ' << d;
    }
  }
}

TEST(Moments, VanishLikeSqrtOneMinusS) {
  const double d = 0.8;
  const double a = moment_functions(1.0 - 1e-6, d).f4 / std::sqrt(1e-6);
  const double b = moment_functions(1.0 - 1e-8, d).f4 / std::sqrt(1e-8);
  EXPECT_NEAR(a / b, 1.0, 1e-2);
}

TEST(CostCell, ArcsinValue) {
  const CostCell c = cost_cell(1.0, 0.0);
  EXPECT_NEAR(c.v, 0.25, 1e-8);
  EXPECT_EQ(c.w_bs, -c.v);
  EXPECT_EQ(c.g, 0.0);
}

TEST(CostCell, ZeroAtInitialTime) {
  for (double d : {-1.0, 0.0, 0.5}) {
    const CostCell c = cost_cell(0.0, d);
    EXPECT_EQ(c.v, 0.0);
    EXPECT_EQ(c.w_h, 0.0);
    EXPECT_EQ(c.w_htilde, 0.0);
  }
  EXPECT_THROW(cost_cell(1.1, 0.0), DomainError);
}

TEST(CostCell, MeanFunction) {
  for (double d : {-2.0, -1.0, 0.3, 1.0}) {
    EXPECT_NEAR(cost_cell(0.5, d).g, -d * std::exp(-0.5 * d * d) / std::sqrt(2.0 * std::numbers::pi), 1e-15);
  }
  // Extremum of |g| at |d| = 1.
  EXPECT_GT(std::abs(cost_cell(0.5, 1.0).g), std::abs(cost_cell(0.5, 0.9).g));
  EXPECT_GT(std::abs(cost_cell(0.5, 1.0).g), std::abs(cost_cell(0.5, 1.1).g));
}

TEST(CostCell, VarianceShape) {
  double prev = 0.0;
  for (double th = 0.1; th <= 1.0 + 1e-12; th += 0.1) {
    const double v = cost_cell(std::min(th, 1.0), 0.7).v;
    EXPECT_GT(v, prev);
    prev = v;
    EXPECT_NEAR(v, cost_cell(std::min(th, 1.0), -0.7).v, 1e-14);
  }
  // Closed form for v with d = 0: arcsin(theta) / (2 pi).
  EXPECT_NEAR(cost_cell(0.6, 0.0).v, std::asin(0.6) / (2.0 * std::numbers::pi), 1e-12);
}

TEST(CostCell, SchemesCoincideAtMaturity) {
  for (double d : {-1.5, -0.5, 0.0, 0.8}) {
    const CostCell c = cost_cell(1.0, d);
    EXPECT_NEAR(c.w_h, c.w_htilde, 1e-9 * std::max(1.0, std::abs(c.w_h))) << d;
    EXPECT_TRUE(std::isfinite(c.w_h));
  }
}

TEST(CostCell, MatchesGenericGreekRoute) {
  const double sigma = 0.5, strike = 1.2;
  const OptionSpec c = OptionSpec::call(strike, 1.0);
  for (double theta : {0.3, 0.7}) {
    for (double m : {0.9, 1.0, 1.15}) {
      const double x0 = m * strike;
      const double d = std::log(m) / sigma - 0.5 * sigma;
      const CostCell cell = cost_cell(theta, d);
      const GenericVariance gv = generic_variance(c, sigma, x0, theta);
      EXPECT_NEAR(gv.v / (strike * strike), cell.v, 1e-6 * std::max(1e-3, cell.v)) << theta << ' ' << m;
      EXPECT_NEAR(gv.w_h / (strike * strike), cell.w_h, 1e-6 * std::max(1e-2, std::abs(cell.w_h)))
          << theta << ' ' << m;
    }
  }
  EXPECT_THROW(generic_variance(c, sigma, 1.0, 1.0), DomainError);
}

TEST(Surfaces, GridAndCsv) {
  Eigen::VectorXd theta(3), d(4);
  theta << 0.0, 0.5, 1.0;
  d << -1.0, 0.0, 0.5, 2.0;
  const CostSurface s = cost_surfaces(theta, d, 2.0);
  EXPECT_TRUE(s.failures.empty());
  EXPECT_EQ(s.v.rows(), 3);
  EXPECT_EQ(s.v.cols(), 4);
  EXPECT_TRUE((s.w_bs.array() == -s.v.array()).all());
  EXPECT_TRUE(s.v.allFinite() && s.w_h.allFinite() && s.w_htilde.allFinite());
  EXPECT_TRUE((s.v.array() >= 0.0).all());
  EXPECT_NEAR(s.v(2, 1), 4.0 * 0.25, 1e-8);
  EXPECT_TRUE((s.v.row(0).array() == 0.0).all());
  std::ostringstream os;
  write_cost_surface_csv(s, os);
  const std::string text = os.str();
  EXPECT_EQ(text.substr(0, text.find('\n')), "theta,d_minus,g,v,w_h,w_bs,w_htilde");
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 13);
}

TEST(Predicted, NoLeverageAllSchemesEqual) {
  const OptionSpec c = OptionSpec::call(1.0, 1.0);
  MarketParams mp;
  mp.sigma_bar = 0.5;
  mp.gamma_param = 0.045;
  const double x0 = 1.05;
  const CostStats hw = predicted_cost_stats(SchemeKind::HW, c, mp, x0, 0.6);
  for (auto k : {SchemeKind::H, SchemeKind::H_tilde, SchemeKind::BS}) {
    const CostStats s = predicted_cost_stats(k, c, mp, x0, 0.6);
    EXPECT_NEAR(s.variance, hw.variance, 1e-15);
    EXPECT_EQ(s.mean, 0.0);
  }
}

TEST(Predicted, VarianceRatioAndMaturityFormula) {
  const VolModel m = expou(0.5);
  const MarketParams mp = market_params(m, effective_params(m));
  const OptionSpec c = OptionSpec::call(1.0, 1.0);
  for (double x0 : {0.8, 1.0, 1.2}) {
    const CostStats hw = predicted_cost_stats(SchemeKind::HW, c, mp, x0, 1.0);
    const CostStats bs = predicted_cost_stats(SchemeKind::BS, c, mp, x0, 1.0);
    const double rb = mp.rho_bar();
    EXPECT_NEAR(bs.variance / hw.variance, 1.0 - rb * rb, 1e-12);
    EXPECT_LE(bs.variance, hw.variance);
    const double d = std::log(x0) / 0.5 - 0.25;
    QuadSpec q;
    q.endpoint_map = EndpointMap::sqrt_right;
    const double integral = integrate_1d(
        [&](double s) { return std::exp(-d * d / (1.0 + s)) / std::sqrt(1.0 - s * s); }, {0.0, 1.0}, q);
    const double expected = std::pow(mp.gamma_param / 0.5, 2) * integral / (2.0 * std::numbers::pi);
    EXPECT_NEAR(hw.variance / expected, 1.0, 1e-9);
    EXPECT_EQ(hw.mean, 0.0);
  }
}

TEST(Predicted, HMeanAndStrikeScaling) {
  const VolModel m = expou(0.5);
  const MarketParams mp = market_params(m, effective_params(m));
  const double strike = 2.0, x0 = 1.8;
  const OptionSpec c = OptionSpec::call(strike, 1.0);
  const double d = std::log(x0 / strike) / 0.5 - 0.25;
  const CostCell cell = cost_cell(0.5, d);
  const CostStats h = predicted_cost_stats(SchemeKind::H, c, mp, x0, 0.5);
  EXPECT_NEAR(h.mean, -0.5 * mp.d_param / 0.25 * strike * cell.g, 1e-15);
  const double g2 = std::pow(mp.gamma_param / 0.5, 2);
  const double d2 = std::pow(mp.d_param / 0.25, 2);
  EXPECT_NEAR(h.variance, strike * strike * (g2 * cell.v + d2 * cell.w_h), 1e-15);
  const CostStats ht = predicted_cost_stats(SchemeKind::H_tilde, c, mp, x0, 0.5);
  EXPECT_NEAR(ht.variance, strike * strike * (g2 * cell.v + d2 * cell.w_htilde), 1e-15);
  EXPECT_THROW(predicted_cost_stats(SchemeKind::custom_da, c, mp, x0, 0.5), DomainError);
}
