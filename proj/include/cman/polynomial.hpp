#pragma once

#include <cstdint>
#include <vector>

#include "cman/grid.hpp"

namespace cman {

using MultiIndex = std::vector<int>;

/// Exponents of all monomials in m variables of total degree <= degree,
/// graded (by total degree, then lexicographically descending).
std::vector<MultiIndex> monomials(int m, int degree);

/// sum_alpha c_alpha ((x - center) / scale)^alpha with one coefficient column
/// per output component.
class Polynomial {
 public:
  Polynomial() = default;
  Polynomial(int m, int degree, Vec center, double scale, Mat coeffs);

  /// Least squares over the given points (rows of X, m columns) and values
  /// (rows of Y). scale defaults to the largest |x - center|.
  static Polynomial fit(const Mat& X, const Mat& Y, int degree, const Vec& center, double scale);
  /// Fit to the finite samples of a planar grid function inside B_r(q).
  static Polynomial fit(const GridFunction& f, const Vec2& q, double r, int degree);

  int m() const { return m_; }
  int degree() const { return degree_; }
  int n() const { return static_cast<int>(coeffs_.cols()); }
  const Vec& center() const { return center_; }
  double scale() const { return scale_; }
  const std::vector<MultiIndex>& exponents() const { return mono_; }
  const Mat& coeffs() const { return coeffs_; }

  double value(const Vec& x, int c = 0) const;
  /// d^beta of component c at x.
  double partial(const Vec& x, int c, const MultiIndex& beta) const;
  /// Planar shorthand: d^a_x d^b_y.
  double partial2(const Vec2& x, int c, int a, int b) const;
  /// All planar partials d^a_x d^b_y of component c with a + b <= order,
  /// written to out[jet_index(a, b)].
  void planar_jet(const Vec2& x, int c, int order, double* out) const;
  /// Frobenius norm of the full (symmetric) k-th derivative tensor of
  /// component c at x: sqrt(sum over ordered index tuples).
  double derivative_norm(const Vec& x, int c, int k) const;

 private:
  int m_ = 2;
  int degree_ = 0;
  Vec center_;
  double scale_ = 1.0;
  std::vector<MultiIndex> mono_;
  Mat coeffs_;
};

/// Slot of d^a_x d^b_y in a planar jet: orders grouped, b ascending.
constexpr int jet_index(int a, int b) { return (a + b) * (a + b + 1) / 2 + b; }
constexpr int jet_size(int order) { return (order + 1) * (order + 2) / 2; }

/// Multinomial k! / prod beta_j!.
double multinomial(const MultiIndex& beta);

/// int_{B_r(q)} |S| for component 0: Gauss integration between the sign
/// changes along each ray from q, angular quadrature with `angles` samples
/// (m = 1: exact up to root finding).
double l1_norm_ball(const Polynomial& S, const Vec& q, double r, int angles = 512);

struct PolyOracleOptions {
  int starts = 100;
  int max_iter = 400;
  std::uint64_t seed = 1;
  int angles = 256;
};
/// max over S of degree <= degree in m variables of sum_k |D^k S(0)| /
/// int_{B_1}|S|, by projected gradient ascent from random starts.
double poly_constant_oracle(int m, int degree, const PolyOracleOptions& opts = {});

struct PolyBoundRow {
  int k = 0;
  double value = 0.0;  // |D^k R(q)|
  double bound = 0.0;  // C / r^{m+k} int_{B_r(q)} |R|
};
/// Per-order values and certified bounds for a scalar polynomial on B_r(q).
std::vector<PolyBoundRow> poly_bound_check(const Polynomial& R, const Vec& q, double r, double C);

struct PolyDerivativeBound {
  std::vector<PolyBoundRow> rows;
  double C = 0.0;
  double fit_residual = 0.0;
  Polynomial fit;
};
/// Fits the samples of component 0 on B_r(q) and checks the derivative
/// bound. Throws when the fit residual exceeds 1e-6 of the sample size.
PolyDerivativeBound poly_derivative_bound(const GridFunction& samples, int degree, double r,
                                          const Vec2& q, double C);

}  // namespace cman
