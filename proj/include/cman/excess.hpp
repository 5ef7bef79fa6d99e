#pragma once

#include <span>
#include <string>

#include "cman/config.hpp"
#include "cman/current.hpp"

namespace cman {

/// Samples of a current restricted to a region, ready for excess and mass
/// integrals: per-node quadrature weight and graph Jacobian, plus the defects
/// inside the region. Everything is in the current's frame coordinates.
class RegionSamples {
 public:
  /// Cylinder B_r(q) x pi^perp over the current's own plane.
  static RegionSamples cylinder(const SampledCurrent& T, const Vec2& q, double r);
  /// Ball B_r(p) of R^{m+n}, p in the current's frame coordinates.
  static RegionSamples ball(const SampledCurrent& T, const Vec& p, double r);
  /// Cylinder over an arbitrary node mask (weights h^2 per selected node).
  static RegionSamples nodes(const SampledCurrent& T, std::span<const std::uint8_t> select);

  int n() const { return n_; }
  std::size_t size() const { return w_.size(); }
  /// Quadrature measure of the base region.
  double area() const;
  /// ||T|| of the region: graph area plus defect masses.
  double mass() const;
  /// e(T, region, tau) = 1/2 int |T - tau|^2 d||T|| for the unit simple
  /// m-vector with orthonormal rows U (frame coordinates).
  double excess_measure(const Mat& U) const;
  /// Same with tau the graph plane of the n x 2 matrix L.
  double excess_measure_tilt(const Mat& L) const;
  /// Mass-weighted mean of the graph Jacobian.
  Mat mean_jacobian() const;
  /// int |Df|^2 / 2 over the region (graph part only).
  double dirichlet_energy() const;

  std::span<const double> weights() const { return w_; }
  std::span<const double> jacobians() const { return jac_; }
  std::span<const std::size_t> node_indices() const { return idx_; }
  const std::vector<DefectSample>& defects() const { return defects_; }

 private:
  void add_node(const GridFunction& g, int i, int j, double w);

  int n_ = 1;
  std::vector<double> w_;
  std::vector<double> jac_;  // n*2 per node, column-major n x 2
  std::vector<double> area_el_;
  std::vector<std::size_t> idx_;
  std::vector<DefectSample> defects_;
};

struct ExcessReport {
  enum class Kind { cylindrical, spherical };
  double value = 0.0;
  Region region;
  Frame plane;  // reference coordinates
  Kind kind = Kind::cylindrical;
  /// Cylindrical only: (1 / 2|B_r|) int |T - pi|^2 d||T||, which agrees with
  /// `value` when the projection is single-sheeted.
  double tilt_form = 0.0;
  int iterations = 0;  // spherical: descent sweeps
};

/// Ex(T, C) = (||T||(C) - |B_r|) / |B_r| with |B_r| the quadrature measure of
/// the base disk. The cylinder is taken over region.frame; when that differs
/// from the current's frame the current is re-charted over it first.
ExcessReport cylindrical_excess(const SampledCurrent& T, const Region& C, const Frame& pi);

/// Ex(T, B, pi) = 1/2 mean of |T - pi|^2 against ||T|| on the ball.
double plane_excess(const SampledCurrent& T, const Region& B, const Frame& pi);

/// min over oriented planes of plane_excess, with the minimising plane.
ExcessReport spherical_excess(const SampledCurrent& T, const Region& B);

struct AdmissibilityResult {
  bool admissible = false;
  double margin = 0.0;  // rhs - lhs
  double lhs = 0.0;
  double rhs = 0.0;
};
/// Ex(T, B_rho(p), pi) <= Cmn eps0^2 rho^{2 - 2 delta}; p in reference coords.
AdmissibilityResult is_admissible(const SampledCurrent& T, const Vec& p, double rho,
                                  const Frame& pi, const ConstantsConfig& cfg);

/// Plane spanned by (e_i, d_i f) at the base point of p (reference coords).
Frame tangent_plane(const SampledCurrent& T, const Vec& p);

struct FirstVariation {
  double lhs = 0.0;             // |int Df . Dkappa|
  double rhs = 0.0;             // int |Dkappa| |Df|^3 (+ bad-set terms)
  double area_variation = 0.0;  // |d/ds area(graph(f + s kappa))| at s = 0
};
/// Integrals over f's ball. kappa must live on the same lattice and vanish
/// near the boundary of the ball. With a good-set mask, the bad nodes add
/// int_{bad} |Dkappa| (dx + dmu) to rhs, mu given per node.
FirstVariation first_variation_residual(const GridFunction& f, const GridFunction& kappa,
                                        std::span<const std::uint8_t> good = {},
                                        std::span<const double> vertical_mass = {});

/// Transform helpers between reference and frame coordinates of planes.
Frame plane_in_frame(const Frame& pi_reference, const Frame& coords);
Frame plane_to_reference(const Frame& pi_in_coords, const Frame& coords);

std::string to_string(ExcessReport::Kind kind);

}  // namespace cman
