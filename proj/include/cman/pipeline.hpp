#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cman/blending.hpp"
#include "cman/certification.hpp"
#include "cman/surfaces.hpp"

namespace cman {

/// Plane attached to each cube's base point: the reference plane pi_0, the
/// tangent plane of the graph, or the plane minimising the spherical excess
/// on B_{8 rho}(p).
enum class PlaneMode { reference, tangent, optimal };
std::string to_string(PlaneMode m);
PlaneMode plane_mode_from_string(const std::string& s);

/// Names accepted in RunConfig::checks.
const std::vector<std::string>& known_checks();

struct RunConfig {
  SurfaceSpec surface;
  ConstantsConfig constants;
  int k_min = 7;
  int k_max = 8;
  std::vector<std::string> checks;  // empty: every known check
  std::string out;                  // output directory, empty: none
  std::uint64_t seed = 1;
  PlaneMode plane_mode = PlaneMode::optimal;
  int blend_samples = 75;  // lattice nodes per half side of Q; not a power of 2, so the
                           // lattice does not alias with the dyadic cube offsets

  /// Throws Error(input) on invalid fields.
  void validate() const;
  bool wants(const std::string& check) const;
};

struct LevelResult {
  int k = 0;
  BlendedSurface H;
  double c0_error = 0.0;   // sup over the Q lattice of |h_k - f|
  double c3_norm = 0.0;    // sum_{l <= 3} sup |D^l h_k|
  double holder = 0.0;     // alpha-Hoelder seminorm of D^3 h_k
  double max_admissibility_ratio = 0.0;
};

struct PipelineResult {
  CertReport report;
  std::vector<LevelResult> levels;
};

/// Interpolants on every cube of level k, with context "k=.., cube .." on
/// stage errors.
std::vector<std::shared_ptr<const Interpolant>> level_interpolants(const SampledCurrent& T, const DyadicGrid& grid,
                                                                   PlaneMode mode, const ConstantsConfig& cfg);

/// Surface -> hypothesis (H) -> per-k interpolants and blend -> checks.
/// Refuses to start (Error precondition) when the generated surface violates
/// ||T||(B_R) <= omega_m R^m (1 + eps1).
PipelineResult run_pipeline(const RunConfig& cfg);

}  // namespace cman
