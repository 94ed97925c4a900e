#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "roughhedge/pricer/pricer.hpp"
#include "roughhedge/volsim/market.hpp"

namespace roughhedge {

enum class SchemeKind { H, H_tilde, HW, BS, custom_da };

std::string to_string(SchemeKind k);
SchemeKind scheme_kind_from_string(const std::string& s);

using DeltaFunction = std::function<double(double t, double x)>;

/// A delta-hedging scheme. dcal is the hedging parameter used by HW and BS;
/// H and H_tilde share the Black-Scholes delta and differ only in how the
/// portfolio is marked at early exercise.
struct HedgeScheme {
  SchemeKind kind = SchemeKind::H;
  double dcal = 0.0;
  DeltaFunction custom;

  static HedgeScheme h() { return {SchemeKind::H, 0.0, {}}; }
  static HedgeScheme h_tilde() { return {SchemeKind::H_tilde, 0.0, {}}; }
  static HedgeScheme hw(double dcal) { return {SchemeKind::HW, dcal, {}}; }
  static HedgeScheme bs(double dcal) { return {SchemeKind::BS, dcal, {}}; }
  static HedgeScheme custom_da(DeltaFunction f) { return {SchemeKind::custom_da, 0.0, std::move(f)}; }

  std::string name() const { return to_string(kind); }
};

/// Holding in the underlying at (t, x). Calls and puts use the closed forms
/// delta_H = N(d+) (minus 1 for puts) and
///   delta_BS = delta_H + dcal d-^2 e^{-d-^2/2} / (x sqrt(tau)),
///   delta_HW = delta_H + dcal (d-^2 - 1) e^{-d-^2/2} / (x sqrt(tau)).
/// Custom payoffs use quadrature: dQ0/dx, dP/dx, and dQ0/dx at the implied
/// volatility of P. Throws DomainError at t = T.
double delta(const HedgeScheme& scheme, const OptionSpec& opt, const MarketParams& mp, double t, double x);

/// Portfolio value convention at early exercise: "Q0" for H, "P" otherwise.
std::string mark_convention(SchemeKind kind);

/// Per-scheme costs of one hedging run.
///
/// costs holds E = V_t - sum_k delta(t_k, X_k)(X_{k+1} - X_k); Y = E minus
/// initiation_value, which is P(0, X0) for every scheme.
struct HedgeOutcome {
  HedgeScheme scheme;
  double exercise_time = 0.0;
  double moneyness = 1.0;
  Eigen::VectorXd costs;
  double mean = 0.0;
  double stdev = 0.0;
  double stderr_ = 0.0;
  double initiation_value = 0.0;
  std::string mark;
  std::uint64_t seed = 0;

  long n_paths() const { return static_cast<long>(costs.size()); }
  double mean_y() const { return mean - initiation_value; }
  Eigen::VectorXd y() const { return costs.array() - initiation_value; }

  /// Recomputes mean, stdev and stderr from costs.
  void summarize_costs();
};

/// CSV with header path_id,cost.
void write_outcome_csv(const HedgeOutcome& outcome, std::ostream& out);

/// Grid index of exercise_time; warns when it is not on the grid and throws
/// DomainError when it lies outside (0, T].
long exercise_step(const GridSpec& grid, double exercise_time);

/// Sufficient statistics of one path for the closed-form schemes.
///
/// mark_q0 and mark_p are the payoff at maturity, else Q0 and P at the
/// exercise point. gains is sum delta_H dX; slope_hw and slope_bs are the
/// sums of the dcal coefficients times dX, so
///   E_H = mark_q0 - gains, E_Ht = mark_p - gains,
///   E_HW = mark_p - gains - dcal slope_hw, E_BS = mark_p - gains - dcal slope_bs.
struct PathLegs {
  double mark_q0 = 0.0;
  double mark_p = 0.0;
  double gains = 0.0;
  double slope_hw = 0.0;
  double slope_bs = 0.0;
};

/// Walks one path x (steps + 1 entries) up to exercise_step, rebalancing
/// every `stride` steps at the left point.
PathLegs hedge_legs(const OptionSpec& opt, const MarketParams& mp, const GridSpec& grid,
                    const Eigen::Ref<const Eigen::VectorXd>& x, long exercise_step, int stride = 1);

double cost_from_legs(const PathLegs& legs, const HedgeScheme& scheme);

/// Cost of one path for any scheme and payoff.
double path_cost(const HedgeScheme& scheme, const OptionSpec& opt, const MarketParams& mp, const GridSpec& grid,
                 const Eigen::Ref<const Eigen::VectorXd>& x, long exercise_step, int stride = 1);

/// Costs over a stored batch.
HedgeOutcome accumulate_cost(const HedgeScheme& scheme, const OptionSpec& opt, const MarketParams& mp,
                             const PathBatch& batch, double exercise_time, int stride = 1, int threads = 1);

/// One (moneyness, exercise time) cell of a streamed experiment.
struct HedgeCell {
  double moneyness = 1.0;
  double exercise_time = 1.0;
};

/// Per-path legs for every cell, from paths streamed through the simulator
/// with common random numbers: path p is generated once with X0 = 1 and
/// rescaled to X0 = m K for each moneyness m. legs[c][p].
struct LegTable {
  std::vector<HedgeCell> cells;
  std::vector<std::vector<PathLegs>> legs;
  std::uint64_t seed = 0;
  long n_paths = 0;
};

LegTable stream_legs(const MarketSimulator& sim, const OptionSpec& opt, const MarketParams& mp,
                     const std::vector<HedgeCell>& cells, long n_paths, std::uint64_t seed, int threads = 1,
                     int stride = 1);

/// Builds the outcome of a closed-form scheme for one cell of a leg table.
HedgeOutcome outcome_from_legs(const LegTable& table, std::size_t cell, const HedgeScheme& scheme,
                               const OptionSpec& opt, const MarketParams& mp);

/// stdev(costs) / Q0(0, x0; sigma_bar). Throws DomainError when the
/// denominator is not positive.
double relative_risk(const HedgeOutcome& outcome, const OptionSpec& opt, const MarketParams& mp, double x0);

/// Search settings for the hedging-parameter calibration.
struct DcalSearch {
  double lower = -0.06;
  double upper = 0.04;
  int grid_points = 101;
  double tolerance = 1e-7;
};

struct DcalCalibration {
  double dcal = 0.0;
  double objective = 0.0;
  bool multiple_minima = false;
  Eigen::VectorXd grid;
  Eigen::VectorXd grid_objective;
};

/// Mean over the table's cells of stdev(E(dcal)) for the HW or BS scheme.
double dcal_objective(SchemeKind kind, const LegTable& table, double dcal);

/// argmin of dcal_objective: grid scan, then golden-section refinement
/// around the best grid point. Uses the same paths for every candidate.
DcalCalibration calibrate_dcal(SchemeKind kind, const LegTable& table, const DcalSearch& search = {});

/// Least-squares Gamma from Var(Y_HW) ~ (Gamma^2 / sigma_bar^2) v:
/// Gamma^2 = sigma_bar^2 sum(var_i v_i) / sum(v_i^2).
double fit_gamma(double sigma_bar, const Eigen::Ref<const Eigen::VectorXd>& variances,
                 const Eigen::Ref<const Eigen::VectorXd>& v_values);

}  // namespace roughhedge
