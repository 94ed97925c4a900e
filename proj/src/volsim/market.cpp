#include "roughhedge/volsim/market.hpp"

#include <cmath>
#include <cstdlib>
#include <string>

#include "roughhedge/mathkit/errors.hpp"
#include "roughhedge/volsim/pathio.hpp"

namespace roughhedge {

int default_thread_count() {
  if (const char* env = std::getenv("ROUGHHEDGE_THREADS")) {
    try {
      const int n = std::stoi(env);
      if (n >= 1) return n;
    } catch (const std::exception&) {
    }
    throw ValidationError(std::string("ROUGHHEDGE_THREADS must be a positive integer, got '") + env + "'");
  }
  return 1;
}

MarketSimulator::MarketSimulator(const VolModel& model, const GridSpec& grid, SamplerOptions options)
    : model_(model), grid_(grid), sampler_((model.validate(), model.kernel), model.sigma_z, grid, model.rho, options) {
  grid_.check_resolution(model_.kernel.epsilon);
}

MarketSimulator::Workspace MarketSimulator::make_workspace() const {
  Workspace ws;
  ws.sampler = sampler_.make_workspace();
  ws.z.resize(grid_.steps + 1);
  ws.dw.resize(grid_.steps);
  return ws;
}

void MarketSimulator::simulate_path(std::uint64_t seed, std::uint64_t path_id, double x0,
                                    Eigen::Ref<Eigen::VectorXd> x, Eigen::Ref<Eigen::VectorXd> sigma,
                                    Workspace& ws) const {
  if (!(x0 > 0.0)) throw DomainError("simulate_path: x0 must be positive");
  const long n = grid_.steps;
  NormalStream rng(seed, path_id);
  sampler_.sample(rng, *ws.sampler, ws.z, ws.dw);
  const double dt = grid_.dt();
  const double sdt = std::sqrt(dt);
  const double rho = model_.rho;
  const double rho_perp = std::sqrt(std::max(0.0, 1.0 - rho * rho));
  double log_x = std::log(x0);
  x(0) = x0;
  for (long k = 0; k <= n; ++k) sigma(k) = model_.vol(ws.z(k));
  for (long k = 0; k < n; ++k) {
    const double dws = rho * ws.dw(k) + rho_perp * sdt * rng();
    const double s = sigma(k);
    log_x += s * dws - 0.5 * s * s * dt;
    x(k + 1) = std::exp(log_x);
  }
}

PathBatch simulate_market(const VolModel& model, const GridSpec& grid, double x0, long n_paths, std::uint64_t seed,
                          SamplerOptions options, int threads) {
  if (n_paths < 1) throw ValidationError("simulate_market: n_paths must be positive");
  MarketSimulator sim(model, grid, options);
  PathBatch batch;
  batch.grid = grid;
  batch.n_paths = n_paths;
  batch.x0 = x0;
  batch.seed = seed;
  batch.model_hash = model_hash(model);
  batch.sampler = sim.sampler_info();
  batch.x.resize(n_paths, grid.steps + 1);
  batch.sigma.resize(n_paths, grid.steps + 1);
  sim.for_each_path(n_paths, seed, x0, threads, [&](long p, const Eigen::VectorXd& x, const Eigen::VectorXd& s) {
    batch.x.row(p) = x.transpose();
    batch.sigma.row(p) = s.transpose();
  });
  return batch;
}

}  // namespace roughhedge
