#pragma once

#include "cman/config.hpp"
#include "cman/current.hpp"
#include "cman/harmonic.hpp"
#include "cman/lipschitz.hpp"
#include "cman/polynomial.hpp"

namespace cman {

struct RotateOptions {
  double c0 = 0.1;  // bound on |R - Id| and on Lip(f)
  double tol = 1e-12;
  int max_iter = 50;
};

/// Graph of f over the source plane seen over the target plane: R maps
/// source coordinates to target coordinates. Samples f' = F o I^{-1} on the
/// lattice of spacing h over B_r(target_center). Each inverted point must land
/// in B_{source_radius}(source_center); throws otherwise, on |R - Id| > c0,
/// or on Newton failure.
GridFunction rotate_graph(const GraphEval& f, const Mat& R, const Vec2& source_center,
                          double source_radius, const Vec2& target_center, double r, double h,
                          const RotateOptions& opts = {});

/// Grid overload: bicubic evaluation of f, source domain = f's ball, target
/// spacing = f's spacing. Also checks Lip(f) <= c0 on f's ball.
GridFunction rotate_graph(const GridFunction& f, const Mat& R, const Vec2& target_center, double r,
                          const RotateOptions& opts = {});

/// The point of the current's graph above c in pi_0, reference coordinates.
Vec base_point(const SampledCurrent& T, const Vec2& c);

struct InterpolateOptions {
  BoundaryScheme scheme = BoundaryScheme::shortley_weller;
  bool keep_stages = true;  // retain f_lip, f_hat and f_bar grids
};

/// (p, rho, pi)-interpolation: g over B_rho(q') in pi_0 with its local
/// polynomial model and derivative jet at q'.
struct Interpolant {
  Vec p;  // provenance, reference coordinates
  double rho = 0.0;
  Frame plane;
  Vec2 center = Vec2::Zero();  // q', the base point of p in pi_0
  double h = 0.0;              // spacing of every stage grid

  double admissibility_lhs = 0.0;
  double admissibility_rhs = 0.0;
  double E = 0.0;  // cylindrical excess of the 8 rho cylinder over pi
  LipStats approx;

  GridFunction f_lip;  // pi coordinates, Lipschitz approximation on B_{6 rho}(q)
  GridFunction f_hat;  // pi coordinates, on B_{5 rho}(q)
  GridFunction f_bar;  // pi coordinates, on B_{4 rho}(q)
  double harmonic_residual = 0.0;
  HarmonicPolynomial f_bar_model;

  GridFunction g;     // pi_0 coordinates, on B_rho(q') plus a stencil collar
  Polynomial model;   // least-squares fit of g on B_rho(q')
  Mat jets;           // n x jet_size(4) partials at q'

  int n() const { return g.n(); }
  /// d^a_x d^b_y g_c at x from the local model.
  double partial(const Vec2& x, int c, int a, int b) const { return model.partial2(x, c, a, b); }
};

Interpolant interpolate(const SampledCurrent& T, const Vec& p, double rho, const Frame& pi,
                        const ConstantsConfig& cfg, const InterpolateOptions& opts = {});

}  // namespace cman
