#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "roughhedge/mathkit/errors.hpp"
#include "roughhedge/mathkit/quadrature.hpp"
#include "roughhedge/mathkit/rng.hpp"
#include "roughhedge/mathkit/special.hpp"
#include "roughhedge/mathkit/stats.hpp"
#include "roughhedge/mathkit/warnings.hpp"

using namespace roughhedge;

TEST(Normal, CdfAndPdfValues) {
  EXPECT_DOUBLE_EQ(normal_cdf(0.0), 0.5);
  EXPECT_NEAR(normal_pdf(0.0), 0.3989422804014327, 1e-15);
  EXPECT_NEAR(normal_cdf(1.96), 0.9750021048517795, 1e-12);
}

TEST(Normal, SymmetryMonotonicityAndDerivative) {
  double prev = 0.0;
  for (double z = -8.0; z <= 8.0; z += 0.25) {
    EXPECT_NEAR(normal_cdf(-z), 1.0 - normal_cdf(z), 1e-15);
    EXPECT_GE(normal_cdf(z), prev);
    prev = normal_cdf(z);
    const double h = 1e-5;
    EXPECT_NEAR((normal_cdf(z + h) - normal_cdf(z - h)) / (2 * h), normal_pdf(z), 1e-9);
  }
}

TEST(Normal, LowerTailKeepsRelativeAccuracy) {
  // Phi(-10) = 7.61985302416047e-24.
  EXPECT_NEAR(normal_cdf(-10.0) / 7.61985302416047e-24, 1.0, 1e-12);
}

TEST(Normal, QuantileRoundTrip) {
  // Above z = 4 the probability 1 - p is resolved to few digits only, so the
  // upper side is checked where the inversion is well conditioned.
  for (double z = -8.0; z <= 4.0; z += 0.1) EXPECT_NEAR(normal_quantile(normal_cdf(z)), z, 1e-10);
  EXPECT_THROW(normal_quantile(0.0), DomainError);
  EXPECT_THROW(normal_quantile(1.0), DomainError);
}

TEST(ExpIntegral, E1Values) {
  EXPECT_NEAR(exp_integral_e1(1.0), 0.2193839343955203, 1e-12);
  EXPECT_LE(exp_integral_e1(10.0), std::exp(-10.0) / 10.0);
  const double z = 1e-8;
  EXPECT_NEAR(exp_integral_e1(z) + std::log(z), -kEulerGamma, 1e-7);
  EXPECT_THROW(exp_integral_e1(0.0), DomainError);
  EXPECT_THROW(exp_integral_e1(-1.0), DomainError);
}

TEST(ExpIntegral, E1DerivativeAndMonotone) {
  for (double z = 0.1; z <= 10.0; z *= 1.3) {
    const double h = 1e-5 * z;
    const double fd = (exp_integral_e1(z + h) - exp_integral_e1(z - h)) / (2 * h);
    EXPECT_NEAR(fd / (-std::exp(-z) / z), 1.0, 1e-6);
    EXPECT_LT(exp_integral_e1(z + 0.01), exp_integral_e1(z));
  }
}

TEST(ExpIntegral, E1MatchesDefiningIntegral) {
  QuadSpec q;
  const double direct = integrate_1d([](double t) { return std::exp(-t) / t; }, {1.0}, q);
  EXPECT_NEAR(direct, exp_integral_e1(1.0), 1e-11);
}

TEST(ExpIntegral, EntireSeriesMatchesEi) {
  for (double x : {0.04, 0.25, 1.0, 4.0, 30.0, 50.0}) {
    EXPECT_NEAR(exp_integral_ei_entire(x), exp_integral_ei(x) - kEulerGamma - std::log(x),
                1e-12 * std::max(1.0, exp_integral_ei(x)));
  }
  EXPECT_NEAR(exp_integral_ei_entire(1e-6) / 1e-6, 1.0, 1e-6);
  EXPECT_EQ(exp_integral_ei_entire(0.0), 0.0);
}

TEST(ExpWeightedPower, MatchesQuadrature) {
  QuadSpec q;
  for (double b : {-0.4, 0.0, 0.2, 0.8}) {
    for (double t : {0.3, 2.0, 15.0, 60.0}) {
      const double direct =
          integrate_1d([&](double u) { return std::pow(u, b) * std::exp(u - t); }, {0.0, t},
                       QuadSpec{QuadScheme::adaptive, 32, 1e-14, 1e-12, EndpointMap::sqrt_left});
      EXPECT_NEAR(exp_weighted_power_integral(b, t), direct, 1e-9 * std::max(1.0, std::abs(direct)))
          << "b=" << b << " t=" << t;
    }
  }
  (void)q;
}

TEST(Quadrature, SpecValidation) {
  QuadSpec q;
  q.order = 1;
  EXPECT_THROW(q.validate(), ValidationError);
  q.order = 8;
  q.abs_tol = 0.0;
  q.rel_tol = 0.0;
  EXPECT_THROW(q.validate(), ValidationError);
}

TEST(Quadrature, FiniteIntervalsCarryTheJacobian) {
  QuadSpec q;
  EXPECT_NEAR(integrate_1d([](double) { return 1.0; }, {0.0, 0.2}, q), 0.2, 1e-14);
  EXPECT_NEAR(integrate_1d([](double x) { return x; }, {1.0, 3.0}, q), 4.0, 1e-13);
  q.scheme = QuadScheme::gauss_legendre;
  EXPECT_NEAR(integrate_1d([](double x) { return x * x; }, {0.0, 2.0}, q), 8.0 / 3.0, 1e-13);
}

TEST(Quadrature, ArcsinWithSqrtRightMap) {
  QuadSpec q;
  q.endpoint_map = EndpointMap::sqrt_right;
  const double v = integrate_1d([](double s) { return 1.0 / std::sqrt(1.0 - s * s); }, {0.0, 1.0}, q);
  EXPECT_NEAR(v, std::numbers::pi / 2.0, 1e-12);
}

TEST(Quadrature, HalfLine) {
  QuadSpec q;
  EXPECT_NEAR(integrate_1d([](double x) { return std::exp(-x); }, {0.0}, q), 1.0, 1e-12);
  EXPECT_NEAR(integrate_1d([](double x) { return 1.0 / (x * x); }, {1.0}, q), 1.0, 1e-10);
}

TEST(Quadrature, BudgetExhaustionCarriesEstimate) {
  QuadSpec q;
  q.max_nodes = 200;
  q.abs_tol = 1e-15;
  q.rel_tol = 1e-15;
  try {
    integrate_1d([](double x) { return std::sin(1.0 / (x + 1e-4)); }, {0.0, 1.0}, q);
    FAIL() << "expected NumericalError";
  } catch (const NumericalError& e) {
    EXPECT_TRUE(std::isfinite(e.best_estimate()));
    EXPECT_GT(e.error_bound(), 0.0);
  }
}

TEST(GaussHermite, ExactForPolynomials) {
  const int n = 16;
  const GaussRule& r = gauss_hermite_rule(n);
  EXPECT_NEAR(r.weights.sum(), 1.0, 1e-14);
  // E[Z^{2k}] = (2k-1)!!
  double dfact = 1.0;
  for (int k = 1; 2 * k <= 2 * n - 1; ++k) {
    dfact *= 2 * k - 1;
    double m = 0.0;
    for (int i = 0; i < n; ++i) m += r.weights(i) * std::pow(r.nodes(i), 2 * k);
    EXPECT_NEAR(m / dfact, 1.0, 1e-12) << "k=" << k;
  }
}

TEST(GaussHermite, BivariateMoments) {
  QuadSpec q;
  q.scheme = QuadScheme::gauss_hermite;
  q.order = 16;
  for (double c : {-1.0, -0.6, 0.0, 0.3, 0.99, 1.0}) {
    EXPECT_NEAR(integrate_gauss_2d([](double, double) { return 1.0; }, {c}, q), 1.0, 1e-13);
    EXPECT_NEAR(integrate_gauss_2d([](double a, double b) { return a * b; }, {c}, q), c, 1e-13);
    // E[e^{Z + Z'}] = e^{1 + c}
    EXPECT_NEAR(integrate_gauss_2d([](double a, double b) { return std::exp(a + b); }, {c}, q), std::exp(1.0 + c),
                1e-10);
  }
  EXPECT_THROW(integrate_gauss_2d([](double, double) { return 1.0; }, {1.5}, q), DomainError);
}

TEST(GaussHermite, AdaptiveRefines) {
  QuadSpec q;
  const double v = integrate_gauss_2d([](double a, double b) { return std::exp(2.0 * a + b); }, {0.5}, q);
  EXPECT_NEAR(v, std::exp(0.5 * (4.0 + 1.0 + 2.0)), 1e-9 * v);
}

TEST(Rng, Deterministic) {
  NormalStream a = rng_stream(42, 7);
  NormalStream b = rng_stream(42, 7);
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(a(), b());
  NormalStream c = rng_stream(42, 8);
  NormalStream d = rng_stream(42, 7);
  int equal = 0;
  for (int i = 0; i < 1000; ++i) equal += c() == d();
  EXPECT_EQ(equal, 0);
}

TEST(Rng, MomentsAtOneMillion) {
  NormalStream r = rng_stream(2024, 0);
  const long n = 1000000;
  CompensatedSum s1, s2;
  for (long i = 0; i < n; ++i) {
    const double z = r();
    s1.add(z);
    s2.add(z * z);
  }
  const double mean = s1.value() / n;
  const double var = s2.value() / n - mean * mean;
  EXPECT_LT(std::abs(mean), 4.0 / std::sqrt(static_cast<double>(n)));
  EXPECT_NEAR(var, 1.0, 0.01);
}

TEST(Rng, IndependentStreamsUncorrelated) {
  const long n = 200000;
  NormalStream a = rng_stream(5, 0), b = rng_stream(5, 1);
  CompensatedSum s;
  for (long i = 0; i < n; ++i) s.add(a() * b());
  EXPECT_LT(std::abs(s.value() / n), 4.0 / std::sqrt(static_cast<double>(n)));
}

TEST(Stats, SummaryAndStderr) {
  Eigen::VectorXd x(5);
  x << 1, 2, 3, 4, 5;
  const SampleSummary s = summarize(x);
  EXPECT_DOUBLE_EQ(s.mean, 3.0);
  EXPECT_NEAR(s.stdev, std::sqrt(2.5), 1e-15);
  EXPECT_NEAR(s.stderr_, std::sqrt(2.5 / 5.0), 1e-15);
  EXPECT_EQ(s.n, 5u);
}

TEST(Stats, PairedStdevDifferenceIsZeroForIdenticalSamples) {
  NormalStream r = rng_stream(1, 1);
  Eigen::VectorXd a(1000);
  r.fill(a);
  EXPECT_NEAR(stdev_difference_stderr(a, a), 0.0, 1e-15);
  Eigen::VectorXd b = 2.0 * a;
  EXPECT_GT(stdev_difference_stderr(a, b), 0.0);
}

TEST(Warnings, HandlerReceivesMessages) {
  std::string got;
  auto prev = set_warning_handler([&](const std::string& m) { got = m; });
  emit_warning("hello");
  set_warning_handler(prev);
  EXPECT_EQ(got, "hello");
}
