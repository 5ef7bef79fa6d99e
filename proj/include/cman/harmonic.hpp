#pragma once

#include "cman/grid.hpp"

namespace cman {

/// Radial bump exp(-1/(1-|w|^2)) sampled at the lattice offsets (a,b) h / rho,
/// normalised so that the weights sum to exactly one.
struct MollifierKernel {
  int reach = 0;               // offsets |a|,|b| <= reach
  std::vector<double> weight;  // (2 reach + 1)^2, row-major in b then a
  double second_moment = 0.0;  // sum weight |w|^2, w = offset h / rho

  MollifierKernel(double h, double rho);
  double at(int a, int b) const { return weight[(b + reach) * (2 * reach + 1) + (a + reach)]; }
};

/// f * phi_rho on the lattice of f, restricted to B_{radius(f) - rho}.
/// Throws if rho < 2h or if the kernel touches undefined samples.
GridFunction mollify(const GridFunction& f, double rho);

enum class BoundaryScheme {
  /// Ghost value from linear interpolation between the last interior node and
  /// the boundary crossing; exact for affine data only.
  linear,
  /// Shortley-Weller three-point stencils across cut cells; exact for
  /// quadratics.
  shortley_weller,
};

struct HarmonicSolve {
  GridFunction value;  // on B_R(q), NaN outside
  double residual = 0.0;  // max |Delta_h u| over interior rows
  std::size_t unknowns = 0;
};

/// Discrete Dirichlet problem Delta u = 0 on B_R(q) with u = boundary(x) at
/// the points where lattice lines cross the circle. Direct sparse solve.
HarmonicSolve harmonic_extend(const std::function<Vec(const Vec2&)>& boundary, const Vec2& q,
                              double R, double h, int n,
                              BoundaryScheme scheme = BoundaryScheme::linear);

/// Same with boundary data read off f by bicubic interpolation; the lattice
/// is f's lattice.
HarmonicSolve harmonic_extend(const GridFunction& f, const Vec2& q, double R,
                              BoundaryScheme scheme = BoundaryScheme::linear);

/// Real harmonic polynomial in the plane, c_0 + sum_k a_k Re(w^k) + b_k Im(w^k)
/// with w = (x - center) / scale, one coefficient column per component.
class HarmonicPolynomial {
 public:
  HarmonicPolynomial() = default;
  HarmonicPolynomial(Vec2 center, double scale, int degree, Mat coeffs);

  /// Least-squares fit to the finite samples of f inside B_R(q).
  static HarmonicPolynomial fit(const GridFunction& f, const Vec2& q, double R, int degree);

  int degree() const { return degree_; }
  int n() const { return static_cast<int>(coeffs_.cols()); }
  const Mat& coeffs() const { return coeffs_; }
  Vec value(const Vec2& x) const;
  /// n x 2 Jacobian.
  Mat jacobian(const Vec2& x) const;
  /// d^{a}_x d^{b}_y of component c.
  double partial(const Vec2& x, int c, int a, int b) const;
  /// int_{B_r(center)} |Du|^2 summed over components (exact, by orthogonality
  /// of the powers of w on circles).
  double dirichlet_integral(double r) const;

 private:
  Vec2 center_ = Vec2::Zero();
  double scale_ = 1.0;
  int degree_ = 0;
  Mat coeffs_;  // (2 degree + 1) x n: c0, a1, b1, a2, b2, ...
};

}  // namespace cman
