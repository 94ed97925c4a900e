#include "roughhedge/volsim/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/FFT>

#include "roughhedge/mathkit/errors.hpp"
#include "roughhedge/mathkit/quadrature.hpp"
#include "roughhedge/mathkit/warnings.hpp"
#include "roughhedge/volsim/kernel.hpp"

namespace roughhedge {

std::string to_string(SamplerMethod m) {
  switch (m) {
    case SamplerMethod::automatic: return "automatic";
    case SamplerMethod::exact_ou: return "exact_ou";
    case SamplerMethod::moving_average: return "moving_average";
    case SamplerMethod::circulant_embedding: return "circulant_embedding";
  }
  return "unknown";
}

SamplerMethod sampler_method_from_string(const std::string& s) {
  if (s == "automatic") return SamplerMethod::automatic;
  if (s == "exact_ou") return SamplerMethod::exact_ou;
  if (s == "moving_average") return SamplerMethod::moving_average;
  if (s == "circulant_embedding") return SamplerMethod::circulant_embedding;
  throw ValidationError("unknown sampler method '" + s + "'");
}

namespace {

long next_pow2(long n) {
  long p = 1;
  while (p < n) p <<= 1;
  return p;
}

}  // namespace

struct FactorSampler::Workspace {
  Eigen::FFT<double> fft;
  std::vector<double> real_in;
  std::vector<double> real_out;
  std::vector<std::complex<double>> spectrum;
  std::vector<std::complex<double>> complex_out;
  Eigen::MatrixXd near;  // near_cells x cells
  Eigen::VectorXd draw;
};

FactorSampler::FactorSampler(const KernelSpec& kernel, double sigma_z, const GridSpec& grid, double rho,
                             SamplerOptions options)
    : kernel_(kernel), sigma_z_(sigma_z), grid_(grid), options_(options) {
  kernel_.validate();
  grid_.validate();
  if (!(sigma_z > 0.0)) throw ValidationError("FactorSampler: sigma_z must be positive");
  if (options_.near_cells < 1) throw ValidationError("FactorSampler: near_cells must be at least 1");
  delta_ = grid_.dt() / kernel_.epsilon;

  SamplerMethod m = options_.method;
  if (m == SamplerMethod::automatic) {
    if (kernel_.markovian())
      m = SamplerMethod::exact_ou;
    else
      m = (rho == 0.0) ? SamplerMethod::circulant_embedding : SamplerMethod::moving_average;
  }
  if (m == SamplerMethod::exact_ou && !kernel_.markovian())
    throw ValidationError("FactorSampler: exact_ou requires the exponential kernel");
  if (m == SamplerMethod::circulant_embedding && rho != 0.0)
    throw ValidationError("FactorSampler: circulant embedding cannot couple leverage (rho must be 0)");

  if (m == SamplerMethod::circulant_embedding && !setup_circulant()) {
    emit_warning("circulant embedding is not positive definite; falling back to the moving average");
    m = SamplerMethod::moving_average;
  }
  if (m == SamplerMethod::exact_ou) setup_exact_ou();
  if (m == SamplerMethod::moving_average) setup_moving_average();
  info_.method = m;
}

FactorSampler::~FactorSampler() = default;
FactorSampler::FactorSampler(FactorSampler&&) noexcept = default;
FactorSampler& FactorSampler::operator=(FactorSampler&&) noexcept = default;

void FactorSampler::setup_exact_ou() {
  // Joint law of (dB, I) over one cell, I = int sqrt(2) e^{-(t_{k+1} - r)} dB_r.
  ou_decay_ = std::exp(-delta_);
  const double var_b = delta_;
  const double cov = std::sqrt(2.0) * -std::expm1(-delta_);
  const double var_i = -std::expm1(-2.0 * delta_);
  ou_factor_.setZero();
  ou_factor_(0, 0) = std::sqrt(var_b);
  ou_factor_(1, 0) = cov / ou_factor_(0, 0);
  ou_factor_(1, 1) = std::sqrt(std::max(0.0, var_i - ou_factor_(1, 0) * ou_factor_(1, 0)));
  info_.discrete_variance = sigma_z_ * sigma_z_;
  info_.truncated_tail = 0.0;
  info_.history_cells = 0;
  info_.fft_size = 0;
  info_.coupled_increments = true;
}

void FactorSampler::setup_moving_average() {
  const int kappa = options_.near_cells;
  const long steps = grid_.steps;
  burn_cells_ = std::max<long>(kappa, static_cast<long>(std::ceil(grid_.burn_in / delta_ - 1e-9)));
  const long cells = burn_cells_ + steps;
  const long fft_size = next_pow2(2 * cells - 1);
  if (fft_size > (1L << 27)) throw ValidationError("FactorSampler: FFT length overflow, reduce burn_in or steps");

  std::vector<double> prim(cells + 1);
  for (long j = 0; j <= cells; ++j) prim[j] = kernel_primitive(kernel_, j * delta_);

  // Near cells: covariance of (dB, I_0, ..., I_{kappa-1}) for one cell.
  Eigen::MatrixXd cov(kappa + 1, kappa + 1);
  cov(0, 0) = delta_;
  for (int j = 0; j < kappa; ++j) {
    cov(0, j + 1) = cov(j + 1, 0) = prim[j + 1] - prim[j];
    for (int l = j; l < kappa; ++l)
      cov(j + 1, l + 1) = cov(l + 1, j + 1) = kernel_cell_product(kernel_, j * delta_, l * delta_, delta_);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  const Eigen::VectorXd lambda = es.eigenvalues().cwiseMax(0.0);
  near_factor_ = es.eigenvectors() * lambda.cwiseSqrt().asDiagonal();

  // Far cells: cell-averaged weights, transformed once.
  std::vector<double> w(fft_size, 0.0);
  double far_sq = 0.0;
  for (long j = kappa; j < cells; ++j) {
    w[j] = (prim[j + 1] - prim[j]) / delta_;
    if (j < burn_cells_) far_sq += w[j] * w[j] * delta_;
  }
  Eigen::FFT<double> fft;
  fft.SetFlag(Eigen::FFT<double>::HalfSpectrum);
  fft.fwd(weight_spectrum_, w);

  double near_sq = 0.0;
  for (int j = 0; j < kappa; ++j) near_sq += cov(j + 1, j + 1);
  info_.discrete_variance = sigma_z_ * sigma_z_ * (near_sq + far_sq);
  const double horizon = burn_cells_ * delta_;
  QuadSpec q;
  q.abs_tol = 1e-14;
  q.rel_tol = 1e-10;
  info_.truncated_tail = sigma_z_ * sigma_z_ * integrate_1d(
                                                   [&](double u) {
                                                     const double k = kernel_eval(kernel_, u);
                                                     return k * k;
                                                   },
                                                   {horizon}, q);
  info_.history_cells = burn_cells_;
  info_.fft_size = fft_size;
  info_.coupled_increments = true;
  if (info_.truncated_tail > 1e-3 * sigma_z_ * sigma_z_) {
    std::ostringstream os;
    os << "moving-average history of " << grid_.burn_in << " epsilon drops " << info_.truncated_tail / (sigma_z_ * sigma_z_)
       << " of the factor variance";
    emit_warning(os.str());
  }
}

bool FactorSampler::setup_circulant() {
  const long n = grid_.steps;
  for (long m = next_pow2(n); 2 * m <= options_.max_circulant; m *= 2) {
    std::vector<std::complex<double>> row(2 * m);
    for (long k = 0; k <= m; ++k) {
      const double c = sigma_z_ * sigma_z_ * covariance_cz(kernel_, k * delta_);
      row[k] = c;
      if (k > 0 && k < m) row[2 * m - k] = c;
    }
    Eigen::FFT<double> fft;
    std::vector<std::complex<double>> eig;
    fft.fwd(eig, row);
    double lo = eig[0].real(), hi = eig[0].real();
    for (const auto& e : eig) {
      lo = std::min(lo, e.real());
      hi = std::max(hi, e.real());
    }
    if (lo < -1e-10 * hi) continue;
    circulant_scale_.resize(2 * m);
    for (long k = 0; k < 2 * m; ++k) circulant_scale_(k) = std::sqrt(std::max(0.0, eig[k].real()) / (2.0 * m));
    info_.discrete_variance = circulant_scale_.squaredNorm();
    info_.truncated_tail = 0.0;
    info_.history_cells = 0;
    info_.fft_size = 2 * m;
    info_.coupled_increments = false;
    return true;
  }
  return false;
}

void FactorSampler::WorkspaceDeleter::operator()(Workspace* ws) const { delete ws; }

FactorSampler::WorkspacePtr FactorSampler::make_workspace() const {
  WorkspacePtr ws(new Workspace);
  if (info_.method == SamplerMethod::moving_average) {
    ws->fft.SetFlag(Eigen::FFT<double>::HalfSpectrum);
    ws->real_in.assign(info_.fft_size, 0.0);
    ws->near.resize(options_.near_cells, burn_cells_ + grid_.steps);
    ws->draw.resize(options_.near_cells + 1);
  } else if (info_.method == SamplerMethod::circulant_embedding) {
    ws->spectrum.resize(info_.fft_size);
  }
  return ws;
}

void FactorSampler::sample(NormalStream& rng, Workspace& ws, Eigen::Ref<Eigen::VectorXd> z,
                           Eigen::Ref<Eigen::VectorXd> dw) const {
  const long steps = grid_.steps;
  if (z.size() != steps + 1 || dw.size() != steps) throw DomainError("FactorSampler::sample: output size mismatch");
  const double root_eps = std::sqrt(kernel_.epsilon);

  switch (info_.method) {
    case SamplerMethod::exact_ou: {
      z(0) = sigma_z_ * rng();
      for (long k = 0; k < steps; ++k) {
        const double g0 = rng();
        const double g1 = rng();
        const double db = ou_factor_(0, 0) * g0;
        const double in = ou_factor_(1, 0) * g0 + ou_factor_(1, 1) * g1;
        z(k + 1) = ou_decay_ * z(k) + sigma_z_ * in;
        dw(k) = root_eps * db;
      }
      return;
    }
    case SamplerMethod::moving_average: {
      const int kappa = options_.near_cells;
      const long cells = burn_cells_ + steps;
      for (long m = 0; m < cells; ++m) {
        for (int i = 0; i <= kappa; ++i) ws.draw(i) = rng();
        ws.real_in[m] = near_factor_.row(0).dot(ws.draw);
        for (int j = 0; j < kappa; ++j) ws.near(j, m) = near_factor_.row(j + 1).dot(ws.draw);
      }
      ws.fft.fwd(ws.spectrum, ws.real_in);
      for (std::size_t i = 0; i < ws.spectrum.size(); ++i) ws.spectrum[i] *= weight_spectrum_[i];
      ws.fft.inv(ws.real_out, ws.spectrum, info_.fft_size);
      for (long k = 0; k <= steps; ++k) {
        double acc = ws.real_out[k - 1 + burn_cells_];
        for (int j = 0; j < kappa; ++j) acc += ws.near(j, k - 1 - j + burn_cells_);
        z(k) = sigma_z_ * acc;
      }
      for (long k = 0; k < steps; ++k) dw(k) = root_eps * ws.real_in[k + burn_cells_];
      return;
    }
    case SamplerMethod::circulant_embedding: {
      const long len = info_.fft_size;
      for (long k = 0; k < len; ++k) {
        const double a = rng();
        const double b = rng();
        ws.spectrum[k] = circulant_scale_(k) * std::complex<double>(a, b);
      }
      ws.fft.fwd(ws.complex_out, ws.spectrum);
      for (long k = 0; k <= steps; ++k) z(k) = ws.complex_out[k].real();
      const double sdt = std::sqrt(grid_.dt());
      for (long k = 0; k < steps; ++k) dw(k) = sdt * rng();
      return;
    }
    case SamplerMethod::automatic:
      break;
  }
  throw DomainError("FactorSampler::sample: sampler not initialised");
}

FactorPaths sample_factor_paths(const KernelSpec& spec, double sigma_z, const GridSpec& grid, long n_paths,
                                std::uint64_t seed, SamplerOptions options, double rho) {
  if (n_paths < 1) throw ValidationError("sample_factor_paths: n_paths must be positive");
  FactorSampler sampler(spec, sigma_z, grid, rho, options);
  auto ws = sampler.make_workspace();
  FactorPaths out;
  out.z.resize(n_paths, grid.steps + 1);
  out.dw.resize(n_paths, grid.steps);
  Eigen::VectorXd z(grid.steps + 1), dw(grid.steps);
  for (long p = 0; p < n_paths; ++p) {
    NormalStream rng(seed, static_cast<std::uint64_t>(p));
    sampler.sample(rng, *ws, z, dw);
    out.z.row(p) = z.transpose();
    out.dw.row(p) = dw.transpose();
  }
  out.info = sampler.info();
  return out;
}

}  // namespace roughhedge
