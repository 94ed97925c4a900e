#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "roughhedge/volsim/model.hpp"
#include "roughhedge/volsim/sampler.hpp"

namespace roughhedge {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Simulated (X, sigma) trajectories, one path per row.
struct PathBatch {
  GridSpec grid;
  long n_paths = 0;
  double x0 = 1.0;
  std::uint64_t seed = 0;
  std::uint64_t model_hash = 0;
  SamplerInfo sampler;
  RowMatrix x;      // n_paths x (steps + 1)
  RowMatrix sigma;  // n_paths x (steps + 1)
};

/// Worker count from the ROUGHHEDGE_THREADS environment variable, else 1.
int default_thread_count();

/// Correlated (X, sigma) path generator.
///
/// log X_{k+1} = log X_k + sigma_k dW*_k - sigma_k^2 dt / 2 with
/// dW* = rho dW + sqrt(1 - rho^2) dW', sigma_k = F(Z_k) and dW the increments
/// that drive Z. Path p draws from rng_stream(seed, p), so results do not
/// depend on the number of workers.
class MarketSimulator {
 public:
  struct Workspace {
    FactorSampler::WorkspacePtr sampler;
    Eigen::VectorXd z, dw;
  };

  MarketSimulator(const VolModel& model, const GridSpec& grid, SamplerOptions options = {});

  const VolModel& model() const { return model_; }
  const GridSpec& grid() const { return grid_; }
  const SamplerInfo& sampler_info() const { return sampler_.info(); }

  Workspace make_workspace() const;

  /// Fills x and sigma (steps + 1 entries each) for path path_id.
  void simulate_path(std::uint64_t seed, std::uint64_t path_id, double x0, Eigen::Ref<Eigen::VectorXd> x,
                     Eigen::Ref<Eigen::VectorXd> sigma, Workspace& ws) const;

  /// Streams n_paths paths through fn(path_id, x, sigma) without storing
  /// them. fn is called concurrently from `threads` workers; it must only
  /// write to per-path slots.
  template <typename Fn>
  void for_each_path(long n_paths, std::uint64_t seed, double x0, int threads, Fn&& fn) const;

 private:
  VolModel model_;
  GridSpec grid_;
  FactorSampler sampler_;
};

/// Runs fn(i) for i in [0, n) on `threads` workers with dynamic chunking.
/// The first exception thrown by any worker is rethrown.
template <typename Fn>
void parallel_for(long n, int threads, Fn&& fn) {
  threads = std::max(1, std::min<int>(threads, static_cast<int>(std::max<long>(1, n))));
  if (threads == 1) {
    for (long i = 0; i < n; ++i) fn(i, 0);
    return;
  }
  std::atomic<long> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  constexpr long kChunk = 16;
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (long start = next.fetch_add(kChunk); start < n; start = next.fetch_add(kChunk)) {
          const long stop = std::min(n, start + kChunk);
          for (long i = start; i < stop; ++i) fn(i, t);
        }
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (!error) error = std::current_exception();
        next.store(n);
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

template <typename Fn>
void MarketSimulator::for_each_path(long n_paths, std::uint64_t seed, double x0, int threads, Fn&& fn) const {
  threads = std::max(1, threads);
  std::vector<Workspace> workspaces;
  std::vector<Eigen::VectorXd> xs, sigmas;
  for (int t = 0; t < threads; ++t) {
    workspaces.push_back(make_workspace());
    xs.emplace_back(grid_.steps + 1);
    sigmas.emplace_back(grid_.steps + 1);
  }
  parallel_for(n_paths, threads, [&](long p, int t) {
    simulate_path(seed, static_cast<std::uint64_t>(p), x0, xs[t], sigmas[t], workspaces[t]);
    fn(p, static_cast<const Eigen::VectorXd&>(xs[t]), static_cast<const Eigen::VectorXd&>(sigmas[t]));
  });
}

/// Simulates and stores a full batch. Memory is 16 * n_paths * (steps + 1)
/// bytes; use MarketSimulator::for_each_path for large runs.
PathBatch simulate_market(const VolModel& model, const GridSpec& grid, double x0, long n_paths, std::uint64_t seed,
                          SamplerOptions options = {}, int threads = 1);

}  // namespace roughhedge
