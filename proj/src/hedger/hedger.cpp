#include "roughhedge/hedger/hedger.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

#include "roughhedge/mathkit/errors.hpp"
#include "roughhedge/mathkit/format.hpp"
#include "roughhedge/mathkit/special.hpp"
#include "roughhedge/mathkit/stats.hpp"
#include "roughhedge/mathkit/warnings.hpp"

namespace roughhedge {

namespace {

const double kSqrt2Pi = std::sqrt(2.0 * std::numbers::pi);

// D such that D K / (sqrt(2 pi) sigma_bar^2) = dcal.
double d_from_dcal(double dcal, const OptionSpec& opt, const MarketParams& mp) {
  return dcal * kSqrt2Pi * mp.sigma_bar * mp.sigma_bar / opt.strike;
}

bool closed_form(const OptionSpec& opt) { return opt.payoff != PayoffKind::custom; }

}  // namespace

std::string to_string(SchemeKind k) {
  switch (k) {
    case SchemeKind::H: return "H";
    case SchemeKind::H_tilde: return "H_tilde";
    case SchemeKind::HW: return "HW";
    case SchemeKind::BS: return "BS";
    case SchemeKind::custom_da: return "custom_da";
  }
  return "unknown";
}

SchemeKind scheme_kind_from_string(const std::string& s) {
  if (s == "H") return SchemeKind::H;
  if (s == "H_tilde") return SchemeKind::H_tilde;
  if (s == "HW") return SchemeKind::HW;
  if (s == "BS") return SchemeKind::BS;
  if (s == "custom_da") return SchemeKind::custom_da;
  throw ValidationError("unknown hedging scheme '" + s + "'");
}

std::string mark_convention(SchemeKind kind) { return kind == SchemeKind::H ? "Q0" : "P"; }

double delta(const HedgeScheme& scheme, const OptionSpec& opt, const MarketParams& mp, double t, double x) {
  if (!(t < opt.maturity)) throw DomainError("delta: undefined at or after expiry");
  if (scheme.kind == SchemeKind::custom_da) {
    if (!scheme.custom) throw ValidationError("delta: custom_da scheme without a delta function");
    const double d = scheme.custom(t, x);
    if (!std::isfinite(d)) throw DomainError("delta: custom delta is not finite");
    return d;
  }
  if (closed_form(opt)) {
    const BsPoint p = BsPoint::make(opt, mp.sigma_bar, t, x);
    double d = normal_cdf(p.d_plus);
    if (opt.payoff == PayoffKind::put) d -= 1.0;
    const double dm2 = p.d_minus * p.d_minus;
    const double e = std::exp(-0.5 * dm2) / (x * std::sqrt(p.tau));
    if (scheme.kind == SchemeKind::HW) d += scheme.dcal * (dm2 - 1.0) * e;
    if (scheme.kind == SchemeKind::BS) d += scheme.dcal * dm2 * e;
    return d;
  }
  switch (scheme.kind) {
    case SchemeKind::H:
    case SchemeKind::H_tilde: return bs_delta(opt, t, x, mp.sigma_bar);
    case SchemeKind::HW: {
      MarketParams m = mp;
      m.d_param = d_from_dcal(scheme.dcal, opt, mp);
      return corrected_delta(opt, m, t, x);
    }
    case SchemeKind::BS: {
      MarketParams m = mp;
      m.d_param = d_from_dcal(scheme.dcal, opt, mp);
      const double sigma = implied_vol(opt, t, x, corrected_price(opt, m, t, x));
      return bs_delta(opt, t, x, sigma);
    }
    default: break;
  }
  throw DomainError("delta: unsupported scheme");
}

void HedgeOutcome::summarize_costs() {
  const SampleSummary s = summarize(costs);
  mean = s.mean;
  stdev = s.stdev;
  stderr_ = s.stderr_;
}

void write_outcome_csv(const HedgeOutcome& outcome, std::ostream& out) {
  out << "path_id,cost\n";
  for (Eigen::Index p = 0; p < outcome.costs.size(); ++p) out << p << ',' << format_double(outcome.costs(p)) << '\n';
}

long exercise_step(const GridSpec& grid, double exercise_time) {
  if (!(exercise_time > 0.0) || exercise_time > grid.maturity * (1.0 + 1e-12))
    throw DomainError("exercise time must lie in (0, T]");
  const double pos = exercise_time / grid.dt();
  const long n = std::clamp<long>(std::lround(pos), 1, grid.steps);
  if (std::abs(pos - n) > 1e-9 * grid.steps) {
    std::ostringstream os;
    os << "exercise time " << exercise_time << " is off the grid; snapped to " << n * grid.dt();
    emit_warning(os.str());
  }
  return n;
}

PathLegs hedge_legs(const OptionSpec& opt, const MarketParams& mp, const GridSpec& grid,
                    const Eigen::Ref<const Eigen::VectorXd>& x, long n_ex, int stride) {
  if (!closed_form(opt)) throw DomainError("hedge_legs: closed-form legs need a call or put");
  if (x.size() != grid.steps + 1) throw DomainError("hedge_legs: path length does not match the grid");
  if (n_ex < 1 || n_ex > grid.steps) throw DomainError("hedge_legs: exercise step out of range");
  if (stride < 1) throw ValidationError("hedge_legs: stride must be positive");
  const double dt = grid.dt();
  const double k = opt.strike;
  const double s2 = mp.sigma_bar * mp.sigma_bar;
  const double put_shift = opt.payoff == PayoffKind::put ? -1.0 : 0.0;
  PathLegs legs;
  for (long i = 0; i < n_ex; i += stride) {
    const long j = std::min(i + stride, n_ex);
    const double xi = x(i);
    const double tau = s2 * (opt.maturity - i * dt);
    const double sq = std::sqrt(tau);
    const double dm = std::log(xi / k) / sq - 0.5 * sq;
    const double dm2 = dm * dm;
    const double e = std::exp(-0.5 * dm2) / (xi * sq);
    const double dx = x(j) - xi;
    legs.gains += (normal_cdf(dm + sq) + put_shift) * dx;
    legs.slope_hw += (dm2 - 1.0) * e * dx;
    legs.slope_bs += dm2 * e * dx;
  }
  if (n_ex == grid.steps) {
    legs.mark_q0 = legs.mark_p = opt.payoff_at(x(n_ex));
  } else {
    const double te = n_ex * dt;
    legs.mark_q0 = bs_price(opt, te, x(n_ex), mp.sigma_bar);
    legs.mark_p = corrected_price(opt, mp, te, x(n_ex));
  }
  return legs;
}

double cost_from_legs(const PathLegs& legs, const HedgeScheme& scheme) {
  switch (scheme.kind) {
    case SchemeKind::H: return legs.mark_q0 - legs.gains;
    case SchemeKind::H_tilde: return legs.mark_p - legs.gains;
    case SchemeKind::HW: return legs.mark_p - legs.gains - scheme.dcal * legs.slope_hw;
    case SchemeKind::BS: return legs.mark_p - legs.gains - scheme.dcal * legs.slope_bs;
    case SchemeKind::custom_da: break;
  }
  throw DomainError("cost_from_legs: custom_da has no closed-form legs");
}

double path_cost(const HedgeScheme& scheme, const OptionSpec& opt, const MarketParams& mp, const GridSpec& grid,
                 const Eigen::Ref<const Eigen::VectorXd>& x, long n_ex, int stride) {
  if (closed_form(opt) && scheme.kind != SchemeKind::custom_da)
    return cost_from_legs(hedge_legs(opt, mp, grid, x, n_ex, stride), scheme);
  if (x.size() != grid.steps + 1) throw DomainError("path_cost: path length does not match the grid");
  if (n_ex < 1 || n_ex > grid.steps) throw DomainError("path_cost: exercise step out of range");
  if (stride < 1) throw ValidationError("path_cost: stride must be positive");
  const double dt = grid.dt();
  double gains = 0.0;
  for (long i = 0; i < n_ex; i += stride) {
    const long j = std::min(i + stride, n_ex);
    gains += delta(scheme, opt, mp, i * dt, x(i)) * (x(j) - x(i));
  }
  double mark;
  if (n_ex == grid.steps)
    mark = opt.payoff_at(x(n_ex));
  else if (scheme.kind == SchemeKind::H)
    mark = bs_price(opt, n_ex * dt, x(n_ex), mp.sigma_bar);
  else
    mark = corrected_price(opt, mp, n_ex * dt, x(n_ex));
  return mark - gains;
}

HedgeOutcome accumulate_cost(const HedgeScheme& scheme, const OptionSpec& opt, const MarketParams& mp,
                             const PathBatch& batch, double exercise_time, int stride, int threads) {
  const long n_ex = exercise_step(batch.grid, exercise_time);
  HedgeOutcome out;
  out.scheme = scheme;
  out.exercise_time = n_ex * batch.grid.dt();
  out.moneyness = batch.x0 / opt.strike;
  out.costs.resize(batch.n_paths);
  out.initiation_value = corrected_price(opt, mp, 0.0, batch.x0);
  out.mark = mark_convention(scheme.kind);
  out.seed = batch.seed;
  parallel_for(batch.n_paths, threads, [&](long p, int) {
    const Eigen::VectorXd row = batch.x.row(p).transpose();
    out.costs(p) = path_cost(scheme, opt, mp, batch.grid, row, n_ex, stride);
  });
  out.summarize_costs();
  return out;
}

LegTable stream_legs(const MarketSimulator& sim, const OptionSpec& opt, const MarketParams& mp,
                     const std::vector<HedgeCell>& cells, long n_paths, std::uint64_t seed, int threads, int stride) {
  if (cells.empty()) throw ValidationError("stream_legs: no cells");
  const GridSpec& grid = sim.grid();
  std::vector<long> steps;
  for (const auto& c : cells) {
    if (!(c.moneyness > 0.0)) throw ValidationError("stream_legs: moneyness must be positive");
    steps.push_back(exercise_step(grid, c.exercise_time));
  }
  LegTable table;
  table.cells = cells;
  for (std::size_t c = 0; c < cells.size(); ++c) table.cells[c].exercise_time = steps[c] * grid.dt();
  table.legs.assign(cells.size(), std::vector<PathLegs>(n_paths));
  table.seed = seed;
  table.n_paths = n_paths;
  sim.for_each_path(n_paths, seed, 1.0, threads, [&](long p, const Eigen::VectorXd& x, const Eigen::VectorXd&) {
    thread_local Eigen::VectorXd buf;
    buf.resize(x.size());
    for (std::size_t c = 0; c < cells.size(); ++c) {
      buf = x * (cells[c].moneyness * opt.strike);
      table.legs[c][p] = hedge_legs(opt, mp, grid, buf, steps[c], stride);
    }
  });
  return table;
}

HedgeOutcome outcome_from_legs(const LegTable& table, std::size_t cell, const HedgeScheme& scheme,
                               const OptionSpec& opt, const MarketParams& mp) {
  if (cell >= table.cells.size()) throw DomainError("outcome_from_legs: cell index out of range");
  HedgeOutcome out;
  out.scheme = scheme;
  out.exercise_time = table.cells[cell].exercise_time;
  out.moneyness = table.cells[cell].moneyness;
  out.costs.resize(table.n_paths);
  for (long p = 0; p < table.n_paths; ++p) out.costs(p) = cost_from_legs(table.legs[cell][p], scheme);
  out.initiation_value = corrected_price(opt, mp, 0.0, out.moneyness * opt.strike);
  out.mark = mark_convention(scheme.kind);
  out.seed = table.seed;
  out.summarize_costs();
  return out;
}

double relative_risk(const HedgeOutcome& outcome, const OptionSpec& opt, const MarketParams& mp, double x0) {
  const double q0 = bs_price(opt, 0.0, x0, mp.sigma_bar);
  if (!(q0 > 0.0)) throw DomainError("relative_risk: option value is zero");
  return outcome.stdev / q0;
}

double dcal_objective(SchemeKind kind, const LegTable& table, double dcal) {
  if (kind != SchemeKind::HW && kind != SchemeKind::BS)
    throw ValidationError("dcal_objective: only HW and BS depend on the hedging parameter");
  const HedgeScheme scheme{kind, dcal, {}};
  double total = 0.0;
  Eigen::VectorXd e(table.n_paths);
  for (std::size_t c = 0; c < table.cells.size(); ++c) {
    for (long p = 0; p < table.n_paths; ++p) e(p) = cost_from_legs(table.legs[c][p], scheme);
    total += std::sqrt(sample_variance(e));
  }
  return total / static_cast<double>(table.cells.size());
}

DcalCalibration calibrate_dcal(SchemeKind kind, const LegTable& table, const DcalSearch& search) {
  if (!(search.upper > search.lower) || search.grid_points < 3)
    throw ValidationError("calibrate_dcal: invalid search interval or grid");
  DcalCalibration out;
  out.grid = Eigen::VectorXd::LinSpaced(search.grid_points, search.lower, search.upper);
  out.grid_objective.resize(search.grid_points);
  for (int i = 0; i < search.grid_points; ++i) out.grid_objective(i) = dcal_objective(kind, table, out.grid(i));

  Eigen::Index best;
  out.grid_objective.minCoeff(&best);
  int local_minima = 0;
  for (int i = 0; i < search.grid_points; ++i) {
    const bool left = i == 0 || out.grid_objective(i) < out.grid_objective(i - 1);
    const bool right = i == search.grid_points - 1 || out.grid_objective(i) < out.grid_objective(i + 1);
    if (left && right) ++local_minima;
  }
  out.multiple_minima = local_minima > 1;
  if (out.multiple_minima) emit_warning("calibrate_dcal: objective has several local minima; using the global grid minimum");
  if (best == 0 || best == search.grid_points - 1)
    emit_warning("calibrate_dcal: minimum sits on the edge of the search interval");

  double a = out.grid(std::max<Eigen::Index>(0, best - 1));
  double b = out.grid(std::min<Eigen::Index>(search.grid_points - 1, best + 1));
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - phi * (b - a), d = a + phi * (b - a);
  double fc = dcal_objective(kind, table, c), fd = dcal_objective(kind, table, d);
  while (b - a > search.tolerance) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - phi * (b - a);
      fc = dcal_objective(kind, table, c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + phi * (b - a);
      fd = dcal_objective(kind, table, d);
    }
  }
  out.dcal = 0.5 * (a + b);
  out.objective = dcal_objective(kind, table, out.dcal);
  if (out.grid_objective(best) < out.objective) {
    out.dcal = out.grid(best);
    out.objective = out.grid_objective(best);
  }
  return out;
}

double fit_gamma(double sigma_bar, const Eigen::Ref<const Eigen::VectorXd>& variances,
                 const Eigen::Ref<const Eigen::VectorXd>& v_values) {
  if (variances.size() != v_values.size() || variances.size() == 0)
    throw ValidationError("fit_gamma: need matching non-empty samples");
  const double den = v_values.squaredNorm();
  if (!(den > 0.0)) throw DomainError("fit_gamma: v values are all zero");
  const double g2 = sigma_bar * sigma_bar * variances.dot(v_values) / den;
  return std::sqrt(std::max(0.0, g2));
}

}  // namespace roughhedge
