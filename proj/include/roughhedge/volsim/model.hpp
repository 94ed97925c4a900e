#pragma once

#include <cmath>

namespace roughhedge {

enum class KernelKind { standard_ou, fractional_ou };

/// Kernel of the volatility factor. hurst is only meaningful for
/// fractional_ou; standard_ou keeps it at 1/2.
struct KernelSpec {
  KernelKind kind = KernelKind::standard_ou;
  double hurst = 0.5;
  double epsilon = 1.0;

  static KernelSpec ou(double epsilon) { return {KernelKind::standard_ou, 0.5, epsilon}; }
  static KernelSpec fou(double hurst, double epsilon) { return {KernelKind::fractional_ou, hurst, epsilon}; }

  /// True when the kernel is the exponential one (OU, or fOU at H = 1/2).
  bool markovian() const { return kind == KernelKind::standard_ou || hurst == 0.5; }

  /// Throws ValidationError on H outside (0, 1/2], epsilon <= 0, or an OU
  /// spec carrying H != 1/2.
  void validate() const;
};

enum class VolMap { exp_ou };

/// sigma_t = F(Z_t), F(z) = sigma_bar * exp(omega z / sigma_z - omega^2).
struct VolModel {
  KernelSpec kernel;
  double sigma_z = 1.0;
  VolMap map = VolMap::exp_ou;
  double omega = 0.5;
  double sigma_bar = 0.5;
  double rho = 0.0;

  double vol(double z) const { return sigma_bar * std::exp(omega * z / sigma_z - omega * omega); }

  /// F'(z).
  double vol_derivative(double z) const { return vol(z) * omega / sigma_z; }

  void validate() const;
};

/// Uniform time grid on [0, maturity]. burn_in is the stationary history
/// length in units of epsilon used by the moving-average sampler.
struct GridSpec {
  double maturity = 1.0;
  int steps = 4096;
  double burn_in = 50.0;

  double dt() const { return maturity / steps; }

  /// Throws ValidationError on maturity <= 0, steps < 2, burn_in < 0.
  void validate() const;

  /// Emits a warning when dt exceeds epsilon / 4.
  void check_resolution(double epsilon) const;
};

}  // namespace roughhedge
