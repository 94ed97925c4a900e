#pragma once

#include "roughhedge/volsim/model.hpp"

namespace roughhedge {

/// Unscaled kernel K(t). OU: sqrt(2) e^{-t}. fOU:
/// c [t^{H-1/2} - int_0^t (t-s)^{H-1/2} e^{-s} ds], c = sqrt(2 sin(pi H)) / Gamma(H + 1/2).
/// Throws DomainError for t < 0, and for t = 0 when H < 1/2.
double kernel_eval(const KernelSpec& spec, double t);

/// epsilon^{-1/2} K(t / epsilon).
double kernel_eval_scaled(const KernelSpec& spec, double t);

/// int_0^t K(u) du in closed form.
double kernel_primitive(const KernelSpec& spec, double t);

/// int_0^infinity K(u) du: sqrt(2) for the exponential kernel, 0 for H < 1/2.
double kernel_mass(const KernelSpec& spec);

/// int_0^infinity K(u)^2 du by adaptive quadrature (equals 1 by construction).
double kernel_l2_norm_squared(const KernelSpec& spec);

/// Stationary autocorrelation C_Z(s) of the unscaled factor, s >= 0.
double covariance_cz(const KernelSpec& spec, double s);

/// C_K(s, s2) = int_0^infinity K(s + v) K(s2 + v) dv.
double kernel_overlap(const KernelSpec& spec, double s, double s2);

/// int_0^h K(a + u) K(b + u) du, the building block of cell covariances.
double kernel_cell_product(const KernelSpec& spec, double a, double b, double h);

}  // namespace roughhedge
