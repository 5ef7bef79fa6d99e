#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "cman/current.hpp"

namespace cman {

enum class SurfaceKind { plane, tilted, harmonic_quadratic, harmonic_poly, enneper, scherk, spiked };

std::string to_string(SurfaceKind k);
SurfaceKind surface_kind_from_string(const std::string& s);

struct SurfaceSpec {
  SurfaceKind kind = SurfaceKind::plane;
  double epsilon = 0.0;
  Mat tilt = Mat::Zero(1, 2);  // n x 2, tilted only
  // harmonic_poly: f = sum_k a_k Re z^k + b_k Im z^k, one (a_k, b_k) row per k.
  std::vector<std::array<double, 2>> harmonic_coeffs;

  // spiked: defects added on top of `base` (a clean kind with the fields above).
  SurfaceKind base = SurfaceKind::plane;
  double defect_fraction = 0.0;
  double defect_mass = -1.0;  // < 0: 2 h^2
  std::uint64_t seed = 0;

  int resolution = 129;  // lattice nodes per side
  double radius = 1.0;   // domain ball radius in pi_0

  /// Throws Error(input) on invalid fields.
  void validate() const;
  double h() const { return 2.0 * radius / (resolution - 1); }
  /// The lattice extends two cells past the domain ball so that boundary
  /// cells of B_R carry values.
  double sampled_radius() const { return radius + 2 * h(); }
};

/// Exact graph of a clean spec (the spiked kind uses its base).
std::shared_ptr<const GraphSource> surface_source(const SurfaceSpec& spec);

/// Samples over pi_0 on the ball of the SurfaceSpec; spiked surfaces carry
/// `round(defect_fraction * nodes in the ball)` vertical defect samples at
/// seeded distinct nodes.
SampledCurrent generate_surface(const SurfaceSpec& spec);

}  // namespace cman
