#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "roughhedge/hedger/hedger.hpp"
#include "roughhedge/mathkit/quadrature.hpp"
#include "roughhedge/pricer/pricer.hpp"
#include "roughhedge/volsim/model.hpp"

namespace roughhedge {

/// Effective parameters of a volatility model. alpha = d_bar / sigma_bar^3,
/// beta = gamma_bar / sigma_bar^2, rho_bar = rho d_bar / (sigma_bar gamma_bar).
struct EffectiveParams {
  double d_bar = 0.0;
  double gamma_bar = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  double rho_bar = 0.0;
};

/// D_bar = sigma_z int_0^inf E[F(sigma_z Z) FF'(sigma_z Z')] K(s) ds with
/// corr(Z, Z') = C_Z(s). The Gaussian expectation uses a tensor Gauss-Hermite
/// rule of order spec.order, tabulated in the correlation; the outer integral
/// is adaptive with spec's tolerances.
double dbar_general(const VolModel& model, const QuadSpec& spec = {});

/// Gamma_bar = sqrt(2 sigma_z^2 int_0^inf int_s^inf E[FF'(sigma_z Z) FF'(sigma_z Z')]
/// K(s) K(s') ds' ds) with corr(Z, Z') = C_K(s, s'). The double integral is
/// reduced to a single lag integral: with G(c) the Gaussian expectation,
///   Gamma_bar^2 = sigma_z^2 [G(0) (int K)^2 + 2 int_0^inf H(C_Z(u)) du],
///   H(x) = int_0^x (G(c) - G(0)) dc,
/// because C_K(s, s + u) = C_Z(u) - int_0^s K(v) K(v + u) dv.
double gammabar_general(const VolModel& model, const QuadSpec& spec = {});

/// Both parameters plus the derived ratios.
EffectiveParams effective_params(const VolModel& model, const QuadSpec& spec = {});

/// (sigma_bar, D, Gamma) for a model, with D = sqrt(eps) rho d_bar and
/// Gamma = sqrt(eps) gamma_bar.
MarketParams market_params(const VolModel& model, const EffectiveParams& ep);

struct ExpOuConstants {
  double alpha = 0.0;
  double beta = 0.0;
  bool ok = true;
};

/// Closed forms for the exponential map with the OU kernel:
///   alpha = e^{-w^2/2} (e^{2w^2} - 1) / (sqrt(2) w),
///   beta^2 = (Ei(4w^2) - gamma - ln(4w^2)) / 2.
/// omega = 0 returns zeros. ok is false when the values overflow.
ExpOuConstants expou_alpha_beta(double omega);

struct MomentValues {
  double f0 = 0.0;
  double f2 = 0.0;
  double f4 = 0.0;
};

/// f_n(s, d) = e^{d^2/(1+s)} E[D^n e^{-D^2}] with D = (d + Z sqrt(s)) / sqrt(1-s).
/// Throws DomainError for s outside [0, 1].
MomentValues moment_functions(double s, double d);

/// Call cost surfaces over (theta, d_minus), in units of K and K^2.
/// Rows follow theta, columns follow d_minus.
struct CostSurface {
  struct Failure {
    double theta = 0.0;
    double d_minus = 0.0;
    std::string what;
  };

  double strike = 1.0;
  Eigen::VectorXd theta;
  Eigen::VectorXd d_minus;
  Eigen::MatrixXd g;
  Eigen::MatrixXd v;
  Eigen::MatrixXd w_h;
  Eigen::MatrixXd w_bs;
  Eigen::MatrixXd w_htilde;
  std::vector<Failure> failures;
};

struct CostCell {
  double g = 0.0;
  double v = 0.0;
  double w_h = 0.0;
  double w_bs = 0.0;
  double w_htilde = 0.0;
};

/// One cell for K = 1:
///   g = -d e^{-d^2/2} / sqrt(2 pi),
///   v = (1/2pi) int_0^theta e^{-d^2/(1+s)} / sqrt(1 - s^2) ds,
///   w_h = (1/pi) int_0^theta e^{-d^2/(1+s)} (theta-s)/(1-s)^2 [2 f2 - f0] ds
///         - theta^2 d^2 e^{-d^2} / (2 pi),
///   w_bs = -v,
///   w_htilde = (1/2pi) int_0^theta e^{-d^2/(1+s)} [f4 - f0] / (1-s) ds.
/// theta = 0 gives zero variances. Throws DomainError for theta outside
/// [0, 1] and NumericalError when a quadrature fails.
CostCell cost_cell(double theta, double d_minus, const QuadSpec& spec = {});

/// Evaluates every cell in parallel. Failed cells keep the best estimate and
/// are listed in failures.
CostSurface cost_surfaces(const Eigen::Ref<const Eigen::VectorXd>& theta_grid,
                          const Eigen::Ref<const Eigen::VectorXd>& dminus_grid, double strike = 1.0,
                          const QuadSpec& spec = {}, int threads = 1);

/// Long-format CSV with header theta,d_minus,g,v,w_h,w_bs,w_htilde.
void write_cost_surface_csv(const CostSurface& surface, std::ostream& out);

struct CostStats {
  double mean = 0.0;
  double variance = 0.0;
};

/// Leading-order mean and variance of Y_t for a call or put hedged with the
/// given scheme, with theta = t/T and d_minus = d-(x0, 0) at sigma_bar:
///   HW:      0,                           (Gamma^2/sigma_bar^2) v
///   BS:      0,                           (Gamma^2/sigma_bar^2 - D^2/sigma_bar^4) v
///   H:       (theta-1)(D/sigma_bar^2) g,  (Gamma^2/sigma_bar^2) v + (D^2/sigma_bar^4) w_h
///   H_tilde: 0,                           (Gamma^2/sigma_bar^2) v + (D^2/sigma_bar^4) w_htilde
/// Throws DomainError for custom schemes or payoffs.
CostStats predicted_cost_stats(SchemeKind kind, const OptionSpec& opt, const MarketParams& mp, double x0,
                               double exercise_time, const QuadSpec& spec = {});

/// Variance functions v and w_h for any payoff from Greeks computed by
/// quadrature, in absolute units (K^2 times the cost_cell values for a call):
///   v   = sigma_bar^2 int_0^t E[L0^2] ds,
///   w_h = sigma_bar^4 [2 int_0^t (t-s) E[L1^2 + L2 L0] ds - (t L1(0))^2],
/// with Lj the Greek ladder at X_s = x0 e^{sigma_bar sqrt(s) Z - sigma_bar^2 s/2}.
/// Best effort: the inner expectation uses a fixed Gauss-Hermite rule, so
/// kinked payoffs converge slowly as t approaches T.
struct GenericVariance {
  double v = 0.0;
  double w_h = 0.0;
};

GenericVariance generic_variance(const OptionSpec& opt, double sigma_bar, double x0, double exercise_time,
                                 const QuadSpec& spec = {});

}  // namespace roughhedge
