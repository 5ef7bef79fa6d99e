#include "cman/config.hpp"

#include <cmath>
#include <sstream>

namespace cman {
namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw Error(ErrorKind::input, "invalid ConstantsConfig: " + msg);
}

bool unit_open(double v) { return v > 0.0 && v < 1.0; }

}  // namespace

void ConstantsConfig::validate() const {
  require(m >= 1 && n >= 1, "dimensions must be >= 1");
  for (auto [name, v] : {std::pair{"delta", delta}, {"eta", eta}, {"alpha", alpha},
                         {"lambda", lambda}, {"trunc_alpha", trunc_alpha},
                         {"trunc_beta", trunc_beta}, {"sigma", sigma}, {"theta", theta},
                         {"gamma", gamma}, {"tau_exp", tau_exp}, {"decay_theta", decay_theta}}) {
    require(unit_open(v), std::string(name) + " must lie in (0,1)");
  }
  require(eps0 > 0 && eps1 > 0 && Cmn > 0, "eps0, eps1, Cmn must be positive");
  require(grid_h > 0, "grid_h must be positive");
  require(5 < n0 && n0 < k0, "need 5 < n0 < k0");

  // Exponent relations of the truncation argument, for the truncation alpha.
  const double cap = (1.0 - 2.0 * trunc_alpha) / (2.0 * m);
  require(sigma < cap && gamma < cap, "sigma, gamma must be < (1-2a)/(2m)");
  require(2.0 * sigma < theta && theta < gamma, "need 2 sigma < theta < gamma");
  if (m > 1) {
    require((1.0 - 2.0 * trunc_alpha - sigma) * m / (m - 1.0) > 1.0,
            "need (1-2a-sigma) m/(m-1) > 1");
  }
  require(trunc_beta < trunc_alpha && 2.0 * trunc_beta < tau_exp,
          "need trunc_beta < trunc_alpha and 2 trunc_beta < tau");
  require(eta <= trunc_beta, "need eta <= trunc_beta");

  require(lip_constant > 0, "lip_constant must be positive");
  require(interp_radius_factor >= 1.0, "interp_radius_factor must be >= 1");
  require(nodes_per_rho >= 2, "nodes_per_rho must be >= 2 (kernel resolution)");
  require(poly_degree >= 4 && poly_degree <= 8, "poly_degree must be in [4,8]");
  require(harmonic_degree >= 4 && harmonic_degree <= 24, "harmonic_degree must be in [4,24]");
  require(kernel_profile == 0, "only kernel profile 0 is defined");
}

}  // namespace cman
