#pragma once

#include <complex>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "roughhedge/mathkit/rng.hpp"
#include "roughhedge/volsim/model.hpp"

namespace roughhedge {

enum class SamplerMethod { automatic, exact_ou, moving_average, circulant_embedding };

std::string to_string(SamplerMethod m);
SamplerMethod sampler_method_from_string(const std::string& s);

struct SamplerOptions {
  SamplerMethod method = SamplerMethod::automatic;
  /// Number of kernel cells next to the evaluation point that are sampled
  /// jointly with their Brownian increment instead of cell-averaged.
  int near_cells = 2;
  /// Largest circulant length tried before falling back to the moving average.
  long max_circulant = 1L << 24;
};

/// What the sampler actually does, recorded in manifests.
struct SamplerInfo {
  SamplerMethod method = SamplerMethod::automatic;
  /// Stationary variance of the discretized factor at t = 0.
  double discrete_variance = 0.0;
  /// Variance lost by truncating the history (moving average only).
  double truncated_tail = 0.0;
  long history_cells = 0;
  long fft_size = 0;
  /// True when the Brownian increments returned drive the factor.
  bool coupled_increments = true;
};

/// Samples Z on the grid t_k = k dt, k = 0..steps, together with the
/// Brownian increments dW_k over [t_k, t_{k+1}] that drive it.
///
/// exact_ou: exact AR(1) recursion of the OU factor from a stationary start.
/// moving_average: Z_k = sigma_z sum_cells int K^eps(t_k - s) dW_s with a
/// finite history of burn_in * epsilon; the near cells are sampled exactly
/// and the rest use cell-averaged kernel weights, convolved by FFT.
/// circulant_embedding: exact stationary covariance, but the returned dW is
/// independent of Z, so it is only selected when rho = 0.
class FactorSampler {
 public:
  struct Workspace;
  struct WorkspaceDeleter {
    void operator()(Workspace* ws) const;
  };
  using WorkspacePtr = std::unique_ptr<Workspace, WorkspaceDeleter>;

  FactorSampler(const KernelSpec& kernel, double sigma_z, const GridSpec& grid, double rho = 1.0,
                SamplerOptions options = {});
  ~FactorSampler();
  FactorSampler(FactorSampler&&) noexcept;
  FactorSampler& operator=(FactorSampler&&) noexcept;

  const SamplerInfo& info() const { return info_; }
  const GridSpec& grid() const { return grid_; }

  WorkspacePtr make_workspace() const;

  /// z has steps + 1 entries, dw has steps entries.
  void sample(NormalStream& rng, Workspace& ws, Eigen::Ref<Eigen::VectorXd> z,
              Eigen::Ref<Eigen::VectorXd> dw) const;

 private:
  void setup_exact_ou();
  void setup_moving_average();
  bool setup_circulant();

  KernelSpec kernel_;
  double sigma_z_;
  GridSpec grid_;
  SamplerOptions options_;
  SamplerInfo info_;

  double delta_ = 0.0;  // dt / epsilon
  // exact_ou
  double ou_decay_ = 0.0;
  Eigen::Matrix2d ou_factor_ = Eigen::Matrix2d::Zero();
  // moving_average
  long burn_cells_ = 0;
  Eigen::MatrixXd near_factor_;
  std::vector<std::complex<double>> weight_spectrum_;
  // circulant_embedding
  Eigen::VectorXd circulant_scale_;
};

/// Factor paths plus their driving Brownian increments.
struct FactorPaths {
  Eigen::MatrixXd z;   // n_paths x (steps + 1)
  Eigen::MatrixXd dw;  // n_paths x steps
  SamplerInfo info;
};

FactorPaths sample_factor_paths(const KernelSpec& spec, double sigma_z, const GridSpec& grid, long n_paths,
                                std::uint64_t seed, SamplerOptions options = {}, double rho = 1.0);

}  // namespace roughhedge
