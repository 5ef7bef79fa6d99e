#pragma once

#include <functional>
#include <string>
#include <vector>

#include "cman/config.hpp"
#include "cman/current.hpp"

namespace cman {

/// Per-node excess density of a current over its own plane, in units of
/// area: (J - 1) for the graph plus defect masses / h^2 at their nearest
/// node. NaN where the graph is undefined.
std::vector<double> excess_density(const SampledCurrent& T);

/// M_T(x) = sup over ladder radii s with |x - q| + s <= r of the mean excess
/// density over the lattice disk {y : |y - x| <= s}. Values live on the
/// lattice of T.base, NaN outside B_r(q).
struct MaximalField {
  GridFunction M;
  std::vector<double> ladder;
};

/// Dyadic ladder h, 2h, 4h, ... up to r.
std::vector<double> dyadic_ladder(double h, double r);

/// The cylinder must be over T's own plane.
MaximalField maximal_excess(const SampledCurrent& T, const Region& C, std::vector<double> ladder = {});

struct GoodSet {
  std::vector<std::uint8_t> K;  // M <= threshold
  std::vector<std::uint8_t> L;  // M > threshold / 2^m (enlarged bad set)
};
/// Nodes outside the field's ball are in neither set.
GoodSet good_set(const MaximalField& field, double threshold, int m = 2);

/// Symmetrised McShane extension: h = (inf_y (g(y) + lip |x - y|) +
/// sup_y (g(y) - lip |x - y|)) / 2 over y in K, per component, evaluated on
/// every node of g's ball; h = g on K. Throws if K is empty or g restricted to
/// K is not lip-Lipschitz (within 5%, on node pairs at distance <= 4h). The
/// bound actually used is returned through used_lip when non-null.
GridFunction lipschitz_extend(const GridFunction& g, std::span<const std::uint8_t> K, double lip,
                              double* used_lip = nullptr);

struct LipStats {
  double lip_const = 0.0;    // measured on node pairs at distance <= 4h
  double bad_measure = 0.0;  // h^2 * #(B_s \ K)
  double energy_gap = 0.0;   // | ||T||(C_s') - |B_s'| - int_{B_s'} |Df|^2/2 |, s' = s - 2h
  double bad_bound = 0.0;    // 5^m E^{-2 beta} e(T, L-neighbourhood x R^n, e_m)
  double bad_bound_coarse = 0.0;  // 5^m E^{1 - 2 beta} r^m
  double slice_radius = 0.0;      // ring-energy minimising radius
  double competitor_gap = 0.0;    // int_{B_s}|Dg|^2 - int_{B_s \ L}|Dh|^2 of the annulus competitor
};

/// Lipschitz approximation of a current over a cylinder, in the cylinder's
/// frame coordinates.
struct LipApprox {
  GridFunction f;                 // on B_s(q)
  std::vector<std::uint8_t> K;    // good set on f's lattice
  SampledCurrent chart;           // the current over the cylinder's plane, on B_r(q)
  MaximalField maximal;
  double E = 0.0;
  double r = 0.0;
  double s = 0.0;
  double threshold = 0.0;
  double lip_bound = 0.0;
  LipStats stats;
};

/// Maximal truncation with threshold E^{2 trunc_beta}, extension with bound
/// lip_constant * E^eta, on B_s with s = r (1 - E^{(1 - 2 trunc_beta)/m}).
/// Throws when E > eps1 or when the chart is not single-sheeted.
LipApprox approximate(const SampledCurrent& T, const Region& C, const ConstantsConfig& cfg);

/// Lhs and rhs of the slice variation inequality for Phi_psi(x) =
/// sum over sheets of psi(sheet value).
struct SliceTest {
  std::function<double(const Vec&)> psi;
  double lipschitz = 1.0;  // declared sup |D psi|
};
struct SliceCheck {
  double lhs = 0.0;  // (|D Phi_psi|(A))^2
  double rhs = 0.0;  // 2 e(T, A x R^n, e_m) ||T||(A x R^n)
};
/// A = B_a(qa) in T's plane.
SliceCheck bv_slice_check(const SampledCurrent& T, const SliceTest& psi, const Vec2& qa, double a);

}  // namespace cman
