#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cman/blending.hpp"
#include "cman/excess.hpp"
#include "cman/interpolation.hpp"

namespace cman {

struct CheckRecord {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;
  double slack = 0.0;  // pass iff ratio <= 1 + slack
  bool pass = false;
  std::optional<double> fitted_constant;
  std::optional<double> fitted_exponent;
  std::string inputs_hash;
  std::string detail;
};

/// Builds a record with ratio = lhs / rhs (0 when both vanish, +inf when only
/// rhs does) and pass = ratio <= 1 + slack.
CheckRecord make_check(std::string name, double lhs, double rhs, double slack, std::string_view inputs);

struct CertReport {
  std::vector<CheckRecord> checks;
  std::vector<std::pair<std::string, std::string>> metadata;

  void add(CheckRecord r) { checks.push_back(std::move(r)); }
  bool all_pass() const;
};

/// 64-bit FNV-1a of the text, as 16 hex digits.
std::string hash_inputs(std::string_view text);

// ---------------------------------------------------------------------------

struct L1Check {
  double lhs = 0.0;     // int_{B_4rho(q)} |f - f_bar|, 0 below kRoundoff * int |f_bar|
  double budget = 0.0;  // rho^{m+3+alpha}
  double constant = 0.0;
};
/// Both functions must share a lattice and be defined on B_{4 rho}(q).
L1Check l1_distance_check(const GridFunction& f, const GridFunction& f_bar, const Vec2& q, double rho,
                          double alpha, int m = 2);

struct DerivativeRow {
  int order = 0;
  double diff = 0.0;        // sup over the comparison set of |D^l a - D^l b|
  double normalized = 0.0;  // diff / rho^{3 + alpha - l}
  double floor = 0.0;       // round-off level; diffs at or below it count as zero
};

/// Relative round-off level of the local fits. Row l of a comparison on a
/// ball of radius rho treats differences below kRoundoff * F / rho^l as
/// zero, F = sum_l rho^l sup |D^l a| the jet scale of the compared data.
inline constexpr double kRoundoff = 1e-11;

struct ScaleComparison {
  std::vector<DerivativeRow> rows;  // l = 0..4
  double constant = 0.0;            // max normalized
};
/// f_bar at scales r and 2r around p over pi, compared on B_{3r/2}.
ScaleComparison scale_comparison(const SampledCurrent& T, const Vec& p, double r, const Frame& pi,
                                 const ConstantsConfig& cfg);

enum class ComparisonMode { cross_plane, cross_center, cross_scale };
std::string to_string(ComparisonMode mode);

struct InterpolantComparison {
  ComparisonMode mode = ComparisonMode::cross_plane;
  std::vector<DerivativeRow> rows;  // D^0..D^3, or D^1..D^4 in cross-center mode
  double constant = 0.0;            // max normalized
  double rho = 0.0;                 // normalising radius (the smaller one)
  // Cross-scale only: |D^3 g1(q') - D^3 g2(q')| / (2^N rho)^alpha.
  int N = 0;
  double center_d3 = 0.0;
  double center_d3_normalized = 0.0;
};
/// Derivative differences of the local models on the overlap of the two
/// interpolants' balls in pi_0 (sampled on a 33 x 33 lattice).
InterpolantComparison interpolant_comparison(const Interpolant& g1, const Interpolant& g2, ComparisonMode mode,
                                             double alpha);

struct HolderResult {
  double seminorm = 0.0;
  std::size_t pairs = 0;
  double best_separation = 0.0;  // |q - q'| of the maximising pair
};
/// max |F(q) - F(q')| / |q - q'|^alpha over seeded random node pairs with
/// |q - q'| >= 2h, |.| the Euclidean norm over the components of F. Throws
/// when F has fewer than two finite nodes or no admissible pair.
HolderResult holder_seminorm(const GridFunction& field, double alpha, std::uint64_t seed = 1,
                             std::size_t pairs = 100000);

/// D^3 h_k as a 4-component field scaled so that the Euclidean norm of a
/// value is the full tensor norm: sqrt(C(3,b)) d^{3-b}_x d^b_y h.
GridFunction third_derivative_field(const BlendedSurface& H, int component = 0);

struct DecayFit {
  std::vector<double> radii;
  std::vector<double> excess;
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;  // rms of the log-log residuals
};
/// Least-squares slope of log excess against log r. Needs >= 4 radii; throws
/// when any excess <= 1e-14.
DecayFit decay_fit(std::vector<double> radii, std::vector<double> excess);
/// Spherical excess Ex(T, B_r(p)) for each radius, then the fit.
DecayFit decay_fit(const SampledCurrent& T, const Vec& p, const std::vector<double>& radii);

struct BasicDecay {
  double e_half = 0.0;
  double e_one = 0.0;
  double ratio = 0.0;
  double threshold = 0.0;  // 1/2^{m+2} + theta
};
BasicDecay basic_decay_ratio(double e_half, double e_one, int m, double theta);
/// Excess measure on the cylinders of radius 1/2 and 1 at the origin, with the
/// plane of the mean slope over the unit disk.
BasicDecay basic_decay_check(const SampledCurrent& T, const ConstantsConfig& cfg);

struct TiltIdentity {
  Mat A;              // mean of Df over B_s
  double lhs = 0.0;   // e(graph f, C_t, tau)
  double rhs = 0.0;   // int_{B_t} |Df - A|^2 / 2
  double gap = 0.0;
  double E = 0.0;     // e(graph f, C_s, tau) / |B_s|
  double constant = 0.0;  // gap / E^{1 + eta}
};
/// f on a ball centred at its lattice centre; t <= s <= f.radius(). Throws
/// when |A| > 1/2 or the sup of |Df| on B_s exceeds 1.
TiltIdentity tilt_excess_identity(const GridFunction& f, double t, double s, double eta);

struct HarmonicLimit {
  std::vector<double> E;
  // W^{1,2}(B_{1/2}) distance to the best degree <= 4 harmonic polynomial,
  // 0 when below kRoundoff times the norm of u
  std::vector<double> distance;
  std::vector<double> energy;    // int_{B_s} |Du|^2
  bool nonincreasing = false;
  bool halved = false;           // final distance <= half the initial one
  double energy_bound = 0.0;     // 2 omega_m (1 + 0.05)
  bool pass = false;
};
/// Blow-up sequence of Lipschitz approximations over the unit cylinder at the
/// origin, ordered by decreasing amplitude. Needs >= 3 currents; throws when
/// some E falls below 1e-14.
HarmonicLimit harmonic_limit_check(const std::vector<SampledCurrent>& family, const ConstantsConfig& cfg);

}  // namespace cman
