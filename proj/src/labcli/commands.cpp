#include <fcntl.h>
#include <unistd.h>

#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include "roughhedge/labcli/labcli.hpp"
#include "roughhedge/mathkit/errors.hpp"
#include "roughhedge/mathkit/format.hpp"
#include "roughhedge/mathkit/stats.hpp"
#include "roughhedge/volsim/market.hpp"
#include "roughhedge/volsim/pathio.hpp"

namespace roughhedge::labcli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr const char* kLockName = ".roughhedge.lock";

fs::path prepare_output(const ExperimentConfig& cfg, const RunOptions& run) {
  const fs::path dir = run.out_dir ? fs::path(*run.out_dir) : fs::path(cfg.output_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ValidationError("cannot create output directory '" + dir.string() + "': " + ec.message());
  return dir;
}

json header(const ExperimentConfig& cfg, const std::string& command) {
  return {{"schema_version", kSchemaVersion}, {"command", command}, {"config_hash", cfg.hash()}, {"seed", cfg.seed}};
}

std::string csv_preamble(const ExperimentConfig& cfg, const std::string& command) {
  std::ostringstream os;
  os << "# roughhedge " << command << " schema_version=" << kSchemaVersion << " config_hash=" << cfg.hash()
     << " seed=" << cfg.seed << '\n';
  return os.str();
}

std::ofstream open_out(const fs::path& file) {
  std::ofstream os(file, std::ios::trunc);
  if (!os) throw ValidationError("cannot open '" + file.string() + "' for writing");
  return os;
}

void write_json(const fs::path& file, const json& j) {
  std::ofstream os = open_out(file);
  os << j.dump(2) << '\n';
  if (!os) throw ValidationError("write to '" + file.string() + "' failed");
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

struct ModelParams {
  EffectiveParams ep;
  MarketParams mp;
};

ModelParams model_params(const ExperimentConfig& cfg) {
  ModelParams m;
  m.ep = effective_params(cfg.model);
  m.mp = market_params(cfg.model, m.ep);
  m.mp.validate();
  return m;
}

json params_json(const ModelParams& m, const ExperimentConfig& cfg) {
  return {{"d_bar", m.ep.d_bar},
          {"gamma_bar", m.ep.gamma_bar},
          {"alpha", m.ep.alpha},
          {"beta", m.ep.beta},
          {"rho_bar", m.ep.rho_bar},
          {"D", m.mp.d_param},
          {"Gamma", m.mp.gamma_param},
          {"sigma_bar", m.mp.sigma_bar},
          {"dcal_theory", m.mp.hedging_parameter(cfg.option.strike)}};
}

HedgeScheme make_scheme(const SchemeConfig& s, const MarketParams& mp, double strike) {
  const double dcal = s.dcal ? *s.dcal : mp.hedging_parameter(strike);
  switch (s.kind) {
    case SchemeKind::H: return HedgeScheme::h();
    case SchemeKind::H_tilde: return HedgeScheme::h_tilde();
    case SchemeKind::HW: return HedgeScheme::hw(dcal);
    case SchemeKind::BS: return HedgeScheme::bs(dcal);
    case SchemeKind::custom_da: break;
  }
  throw ValidationError("custom_da schemes cannot be configured from a file");
}

std::vector<HedgeCell> config_cells(const ExperimentConfig& cfg) {
  std::vector<HedgeCell> cells;
  for (double t : cfg.exercise_times)
    for (double m : cfg.moneyness_grid) cells.push_back({m, t});
  return cells;
}

// Costs for every (scheme, cell), cell-major within each scheme.
struct CostRun {
  std::vector<HedgeCell> cells;
  std::vector<HedgeScheme> schemes;
  std::vector<std::vector<HedgeOutcome>> outcomes;  // [scheme][cell]
};

CostRun run_costs(const ExperimentConfig& cfg, const MarketParams& mp, int threads) {
  CostRun r;
  r.cells = config_cells(cfg);
  for (const auto& s : cfg.schemes) r.schemes.push_back(make_scheme(s, mp, cfg.option.strike));
  r.outcomes.resize(r.schemes.size());
  if (cfg.option.payoff != PayoffKind::custom) {
    const MarketSimulator sim(cfg.model, cfg.grid, cfg.sampler);
    const LegTable table = stream_legs(sim, cfg.option, mp, r.cells, cfg.n_paths, cfg.seed, threads, cfg.stride);
    r.cells = table.cells;
    for (std::size_t s = 0; s < r.schemes.size(); ++s)
      for (std::size_t c = 0; c < r.cells.size(); ++c)
        r.outcomes[s].push_back(outcome_from_legs(table, c, r.schemes[s], cfg.option, mp));
    return r;
  }
  // Custom payoffs: one stored batch per moneyness, all from the same seed.
  for (auto& v : r.outcomes) v.resize(r.cells.size());
  for (double m : cfg.moneyness_grid) {
    const PathBatch batch =
        simulate_market(cfg.model, cfg.grid, m * cfg.option.strike, cfg.n_paths, cfg.seed, cfg.sampler, threads);
    for (std::size_t c = 0; c < r.cells.size(); ++c) {
      if (r.cells[c].moneyness != m) continue;
      for (std::size_t s = 0; s < r.schemes.size(); ++s) {
        r.outcomes[s][c] =
            accumulate_cost(r.schemes[s], cfg.option, mp, batch, r.cells[c].exercise_time, cfg.stride, threads);
      }
    }
  }
  for (std::size_t c = 0; c < r.cells.size(); ++c) r.cells[c].exercise_time = r.outcomes[0][c].exercise_time;
  return r;
}

double stdev_stderr(const HedgeOutcome& o) {
  return o.stdev > 0.0 ? variance_stderr(o.costs) / (2.0 * o.stdev) : 0.0;
}

}  // namespace

DirectoryLock::DirectoryLock(const fs::path& dir) : file_(dir / kLockName) {
  const int fd = ::open(file_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
  if (fd < 0) {
    throw ValidationError("output directory '" + dir.string() + "' is locked by another run (remove " +
                          file_.string() + " if it is stale)");
  }
  const std::string pid = std::to_string(::getpid()) + "\n";
  [[maybe_unused]] const auto n = ::write(fd, pid.data(), pid.size());
  ::close(fd);
}

DirectoryLock::~DirectoryLock() {
  std::error_code ec;
  fs::remove(file_, ec);
}

json outcome_summary(const HedgeOutcome& o) {
  return {{"scheme", o.scheme.name()},     {"dcal", o.scheme.dcal},   {"exercise_time", o.exercise_time},
          {"moneyness", o.moneyness},      {"mean", o.mean},          {"stdev", o.stdev},
          {"stderr", o.stderr_},           {"n_paths", o.n_paths()},  {"seed", o.seed},
          {"initiation_value", o.initiation_value}, {"mark", o.mark}};
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ValidationError*>(&e) || dynamic_cast<const DomainError*>(&e)) return 2;
  if (dynamic_cast<const NumericalError*>(&e)) return 3;
  return 1;
}

json cmd_simulate(const ExperimentConfig& cfg, const RunOptions& run) {
  const fs::path dir = prepare_output(cfg, run);
  DirectoryLock lock(dir);
  const double x0 = cfg.moneyness_grid.front() * cfg.option.strike;
  const PathBatch batch = simulate_market(cfg.model, cfg.grid, x0, cfg.n_paths, cfg.seed, cfg.sampler, run.threads);
  write_path_batch(batch, (dir / "paths.bin").string());
  json j = header(cfg, "simulate");
  j["model_hash"] = hex64(batch.model_hash);
  j["n_paths"] = batch.n_paths;
  j["steps"] = batch.grid.steps;
  j["maturity"] = batch.grid.maturity;
  j["x0"] = batch.x0;
  j["sampler"] = {{"method", to_string(batch.sampler.method)},
                  {"discrete_variance", batch.sampler.discrete_variance},
                  {"truncated_tail", batch.sampler.truncated_tail},
                  {"history_cells", batch.sampler.history_cells},
                  {"fft_size", batch.sampler.fft_size},
                  {"coupled_increments", batch.sampler.coupled_increments}};
  j["files"] = {"paths.bin", "manifest.json"};
  j["config"] = cfg.canonical();
  write_json(dir / "manifest.json", j);
  return j;
}

json cmd_surfaces(const ExperimentConfig& cfg, const RunOptions& run) {
  if (cfg.option.payoff == PayoffKind::custom) throw ValidationError("surfaces: closed forms cover calls and puts");
  const fs::path dir = prepare_output(cfg, run);
  DirectoryLock lock(dir);
  const Eigen::Map<const Eigen::VectorXd> theta(cfg.surfaces.theta.data(),
                                                static_cast<Eigen::Index>(cfg.surfaces.theta.size()));
  const Eigen::Map<const Eigen::VectorXd> dm(cfg.surfaces.d_minus.data(),
                                             static_cast<Eigen::Index>(cfg.surfaces.d_minus.size()));
  const CostSurface surface = cost_surfaces(theta, dm, cfg.option.strike, {}, run.threads);
  {
    std::ofstream os = open_out(dir / "surfaces.csv");
    os << csv_preamble(cfg, "surfaces");
    write_cost_surface_csv(surface, os);
  }
  json files = {"surfaces.csv"};

  std::vector<CostSurface::Failure> failures = surface.failures;
  if (!cfg.surfaces.tau.empty() && !cfg.surfaces.moneyness.empty()) {
    std::ofstream os = open_out(dir / "maturity_stdev.csv");
    os << csv_preamble(cfg, "surfaces");
    os << "tau,moneyness,d_minus,normalized_stdev\n";
    for (double tau : cfg.surfaces.tau) {
      for (double m : cfg.surfaces.moneyness) {
        const double sq = std::sqrt(tau);
        const double d = std::log(m) / sq - 0.5 * sq;
        double value = std::numeric_limits<double>::quiet_NaN();
        try {
          value = std::sqrt(cost_cell(1.0, d).v);
        } catch (const NumericalError& e) {
          failures.push_back({1.0, d, e.what()});
        }
        os << format_double(tau) << ',' << format_double(m) << ',' << format_double(d) << ','
           << format_double(value) << '\n';
      }
    }
    files.push_back("maturity_stdev.csv");
  }

  json j = header(cfg, "surfaces");
  j["strike"] = cfg.option.strike;
  j["cells"] = surface.theta.size() * surface.d_minus.size();
  j["failures"] = json::array();
  for (const auto& f : failures) j["failures"].push_back({{"theta", f.theta}, {"d_minus", f.d_minus}, {"what", f.what}});
  files.push_back("surfaces.json");
  j["files"] = files;
  write_json(dir / "surfaces.json", j);
  if (!failures.empty())
    throw NumericalError("surfaces: " + std::to_string(failures.size()) + " cells failed; see surfaces.json");
  return j;
}

json cmd_hedge(const ExperimentConfig& cfg, const RunOptions& run) {
  const fs::path dir = prepare_output(cfg, run);
  DirectoryLock lock(dir);
  const ModelParams params = model_params(cfg);
  const CostRun costs = run_costs(cfg, params.mp, run.threads);

  // Paired comparison against the first BS scheme, if any.
  std::optional<std::size_t> bs;
  for (std::size_t s = 0; s < costs.schemes.size(); ++s)
    if (!bs && costs.schemes[s].kind == SchemeKind::BS) bs = s;

  json rows = json::array();
  std::ofstream csv = open_out(dir / "hedge.csv");
  csv << csv_preamble(cfg, "hedge");
  csv << "scheme,dcal,exercise_time,moneyness,n_paths,mean_y,stdev,stdev_stderr,relative_risk,relative_risk_stderr,"
         "gap_vs_bs,gap_vs_bs_stderr\n";
  for (std::size_t s = 0; s < costs.schemes.size(); ++s) {
    for (std::size_t c = 0; c < costs.cells.size(); ++c) {
      const HedgeOutcome& o = costs.outcomes[s][c];
      const double x0 = o.moneyness * cfg.option.strike;
      const double q0 = bs_price(cfg.option, 0.0, x0, params.mp.sigma_bar);
      const double se = stdev_stderr(o);
      double gap = 0.0, gap_se = 0.0;
      if (bs) {
        const HedgeOutcome& b = costs.outcomes[*bs][c];
        gap = o.stdev - b.stdev;
        gap_se = s == *bs ? 0.0 : stdev_difference_stderr(o.costs, b.costs);
      }
      const double rr = relative_risk(o, cfg.option, params.mp, x0);
      rows.push_back({{"scheme", o.scheme.name()},
                      {"dcal", o.scheme.dcal},
                      {"exercise_time", o.exercise_time},
                      {"moneyness", o.moneyness},
                      {"n_paths", o.n_paths()},
                      {"mean_y", o.mean_y()},
                      {"mean_stderr", o.stderr_},
                      {"stdev", o.stdev},
                      {"stdev_stderr", se},
                      {"relative_risk", rr},
                      {"relative_risk_stderr", se / q0},
                      {"gap_vs_bs", gap},
                      {"gap_vs_bs_stderr", gap_se}});
      csv << o.scheme.name() << ',' << format_double(o.scheme.dcal) << ',' << format_double(o.exercise_time) << ','
          << format_double(o.moneyness) << ',' << o.n_paths() << ',' << format_double(o.mean_y()) << ','
          << format_double(o.stdev) << ',' << format_double(se) << ',' << format_double(rr) << ','
          << format_double(se / q0) << ',' << format_double(gap) << ',' << format_double(gap_se) << '\n';
    }
  }
  json j = header(cfg, "hedge");
  j["effective_params"] = params_json(params, cfg);
  j["rows"] = rows;
  j["files"] = {"hedge.csv", "hedge.json"};
  write_json(dir / "hedge.json", j);
  return j;
}

json cmd_calibrate(const ExperimentConfig& cfg, const RunOptions& run) {
  if (cfg.option.payoff == PayoffKind::custom) throw ValidationError("calibrate: needs a call or put");
  const fs::path dir = prepare_output(cfg, run);
  DirectoryLock lock(dir);
  const ModelParams params = model_params(cfg);
  const MarketSimulator sim(cfg.model, cfg.grid, cfg.sampler);
  const LegTable table =
      stream_legs(sim, cfg.option, params.mp, config_cells(cfg), cfg.n_paths, cfg.seed, run.threads, cfg.stride);
  const DcalCalibration cal = calibrate_dcal(cfg.calibration.scheme, table, cfg.calibration.search);
  const double theory = params.mp.hedging_parameter(cfg.option.strike);
  const double at_theory = dcal_objective(cfg.calibration.scheme, table, theory);

  std::ofstream csv = open_out(dir / "calibrate_curve.csv");
  csv << csv_preamble(cfg, "calibrate");
  csv << "dcal,objective\n";
  for (Eigen::Index i = 0; i < cal.grid.size(); ++i)
    csv << format_double(cal.grid(i)) << ',' << format_double(cal.grid_objective(i)) << '\n';

  json j = header(cfg, "calibrate");
  j["scheme"] = to_string(cfg.calibration.scheme);
  j["effective_params"] = params_json(params, cfg);
  j["dcal_optimal"] = cal.dcal;
  j["objective_optimal"] = cal.objective;
  j["multiple_minima"] = cal.multiple_minima;
  j["dcal_theory"] = theory;
  j["objective_theory"] = at_theory;
  j["objective_ratio"] = at_theory / cal.objective;
  j["files"] = {"calibrate_curve.csv", "calibrate.json"};
  write_json(dir / "calibrate.json", j);
  return j;
}

json cmd_predict(const ExperimentConfig& cfg, const RunOptions& run) {
  if (cfg.option.payoff == PayoffKind::custom) throw ValidationError("predict: closed forms cover calls and puts");
  const fs::path dir = prepare_output(cfg, run);
  DirectoryLock lock(dir);
  const ModelParams params = model_params(cfg);
  std::optional<CostRun> mc;
  if (cfg.predict.monte_carlo) mc = run_costs(cfg, params.mp, run.threads);

  const std::vector<HedgeCell> cells = config_cells(cfg);
  json rows = json::array();
  for (std::size_t s = 0; s < cfg.schemes.size(); ++s) {
    const HedgeScheme scheme = make_scheme(cfg.schemes[s], params.mp, cfg.option.strike);
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const double x0 = cells[c].moneyness * cfg.option.strike;
      const double t = mc ? mc->cells[c].exercise_time : cells[c].exercise_time;
      const CostStats p = predicted_cost_stats(scheme.kind, cfg.option, params.mp, x0, t);
      json row{{"scheme", scheme.name()},
               {"dcal", scheme.dcal},
               {"exercise_time", t},
               {"moneyness", cells[c].moneyness},
               {"predicted_mean", p.mean},
               {"predicted_variance", p.variance}};
      if (mc) {
        const HedgeOutcome& o = mc->outcomes[s][c];
        row["mc_mean_y"] = o.mean_y();
        row["mc_mean_stderr"] = o.stderr_;
        row["mc_variance"] = o.stdev * o.stdev;
        row["mc_variance_stderr"] = variance_stderr(o.costs);
      }
      rows.push_back(row);
    }
  }
  json j = header(cfg, "predict");
  j["effective_params"] = params_json(params, cfg);
  j["variance_ratio_bs_hw"] = 1.0 - params.mp.rho_bar() * params.mp.rho_bar();
  j["rows"] = rows;
  if (mc) {
    // Least-squares Gamma from the HW variances against v, the synthetic
    // version of estimating Gamma from observed hedging costs.
    for (std::size_t s = 0; s < cfg.schemes.size(); ++s) {
      if (cfg.schemes[s].kind != SchemeKind::HW) continue;
      const double k = cfg.option.strike, sb = params.mp.sigma_bar, horizon = cfg.option.maturity;
      const double sqrt_tau = sb * std::sqrt(horizon);
      Eigen::VectorXd var(cells.size()), v(cells.size());
      for (std::size_t c = 0; c < cells.size(); ++c) {
        const double d = std::log(cells[c].moneyness) / sqrt_tau - 0.5 * sqrt_tau;
        v(c) = k * k * cost_cell(mc->cells[c].exercise_time / horizon, d).v;
        const double sd = mc->outcomes[s][c].stdev;
        var(c) = sd * sd;
      }
      j["gamma_fit"] = {{"scheme", "HW"}, {"gamma", fit_gamma(sb, var, v)}, {"gamma_model", params.mp.gamma_param}};
      break;
    }
  }
  j["files"] = {"predict.json"};
  write_json(dir / "predict.json", j);
  return j;
}

}  // namespace roughhedge::labcli
