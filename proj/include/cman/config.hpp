#pragma once

#include <stdexcept>
#include <string>

namespace cman {

enum class ErrorKind {
  input,        // malformed arguments or configuration
  precondition, // a mathematical precondition of an operation does not hold
  numerical,    // a solver or iteration failed
  io
};

/// Exception carrying a coarse classification and an optional stage tag
/// ("mollify", "k=8 cube 12", ...) that pipeline layers prepend to.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

  Error with_context(const std::string& ctx) const {
    return Error(kind_, ctx + ": " + what());
  }

 private:
  ErrorKind kind_;
};

/// Numerical constants of the construction. The theory only asserts the
/// existence of suitable values; the defaults below satisfy every stated
/// inequality between them and are reported with each run.
struct ConstantsConfig {
  int m = 2;
  int n = 1;

  double delta = 0.05;   // excess decay loss, Ex(B_r) <~ r^{2-2 delta}
  double eta = 0.05;     // Lipschitz-approximation gain exponent
  double alpha = 0.1;    // Hoelder exponent of the C^{3,alpha} estimates
  double lambda = 0.05;  // Laplacian decay gain of the mollified approximation

  double eps0 = 0.1;
  double eps1 = 0.05;
  double Cmn = 4.0;

  // Maximal-function truncation exponents (e(T) threshold E^{2 trunc_beta}).
  double trunc_alpha = 0.2;
  double trunc_beta = 0.1;
  double sigma = 0.03;
  double theta = 0.08;
  double gamma = 0.12;
  double tau_exp = 0.25;

  double lip_constant = 1.0;   // C in Lip(f) <= C E^eta
  double decay_theta = 0.05;   // slack in the one-step decay threshold

  int n0 = 6;
  int k0 = 7;

  double interp_radius_factor = 8.0;  // rho_k = factor * 2^-k
  int nodes_per_rho = 6;               // local grid spacing rho / nodes_per_rho
  int poly_degree = 6;                 // local polynomial model of an interpolant
  int harmonic_degree = 12;            // harmonic expansion used off-grid

  int kernel_profile = 0;  // 0: exp(-1/(1-|w|^2)) on the unit ball
  double grid_h = 1.0 / 64.0;

  /// Throws Error(input) when an invariant is violated.
  void validate() const;
};

}  // namespace cman
