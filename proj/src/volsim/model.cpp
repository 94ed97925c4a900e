#include "roughhedge/volsim/model.hpp"

#include <sstream>

#include "roughhedge/mathkit/errors.hpp"
#include "roughhedge/mathkit/warnings.hpp"

namespace roughhedge {

void VolModel::validate() const {
  kernel.validate();
  if (!(sigma_z > 0.0)) throw ValidationError("VolModel: sigma_z must be positive");
  if (!(omega >= 0.0)) throw ValidationError("VolModel: omega must be non-negative");
  if (!(sigma_bar > 0.0)) throw ValidationError("VolModel: sigma_bar must be positive");
  if (!(rho >= -1.0 && rho <= 1.0)) throw ValidationError("VolModel: rho must lie in [-1, 1]");
}

void GridSpec::validate() const {
  if (!(maturity > 0.0)) throw ValidationError("GridSpec: maturity must be positive");
  if (steps < 2) throw ValidationError("GridSpec: steps must be at least 2");
  if (!(burn_in >= 0.0)) throw ValidationError("GridSpec: burn_in must be non-negative");
}

void GridSpec::check_resolution(double epsilon) const {
  if (dt() > 0.25 * epsilon) {
    std::ostringstream os;
    os << "time step " << dt() << " exceeds epsilon/4 = " << 0.25 * epsilon
       << "; the volatility factor is under-resolved";
    emit_warning(os.str());
  }
}

}  // namespace roughhedge
