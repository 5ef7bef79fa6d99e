#pragma once

#include "cman/grid.hpp"

namespace cman {

/// Oriented orthonormal coordinates x' = A x of R^{m+n}. The first m rows of
/// A span the horizontal plane pi of the frame (they factor its unit simple
/// m-vector); the remaining n rows span pi^perp.
class Frame {
 public:
  Frame() = default;
  /// Checks orthogonality and det = +1 to 1e-12.
  Frame(Mat rotation, int m);

  static Frame identity(int m, int n);
  /// Frame whose plane is the graph plane {(x, L x)} of the n x m matrix L.
  static Frame from_tilt(const Mat& L);
  /// Frame rotating by `angle` in the (x_a, x_b) coordinate plane.
  static Frame from_plane_rotation(int m, int n, int a, int b, double angle);

  int m() const { return m_; }
  int n() const { return static_cast<int>(A_.rows()) - m_; }
  int dim() const { return static_cast<int>(A_.rows()); }
  const Mat& rotation() const { return A_; }

  /// m x (m+n) orthonormal rows spanning pi, in reference coordinates.
  Mat plane_basis() const { return A_.topRows(m_); }
  /// n x m matrix L with pi = graph of L over pi_0 (requires pi transverse).
  Mat tilt() const;

  Vec to_frame(const Vec& x) const { return A_ * x; }
  Vec to_reference(const Vec& y) const { return A_.transpose() * y; }

  /// |pi - pi'| as unit simple m-vectors.
  double distance(const Frame& other) const;
  /// Operator norm of A - Id.
  double distance_from_identity() const;

 private:
  Mat A_ = Mat::Identity(3, 3);
  int m_ = 2;
};

/// <xi, eta> for simple m-vectors given by their (not necessarily orthonormal)
/// spanning rows: det(U V^T).
double mvector_inner(const Mat& U, const Mat& V);
/// |u_1 ^ ... ^ u_m| = sqrt(det(U U^T)).
double mvector_norm(const Mat& U);
/// |xi - eta|^2 for unit simple m-vectors with spanning rows U, V.
double mvector_dist2(const Mat& U, const Mat& V);

/// Rows (e_i, D e_i) spanning the tangent plane of a graph with Jacobian D
/// (n x m). Not normalised.
Mat graph_tangent_rows(const Mat& D);

/// Gram-Schmidt on rows.
Mat orthonormalize_rows(const Mat& U);

}  // namespace cman
