#include "cman/frame.hpp"

#include <cmath>

#include "cman/config.hpp"

namespace cman {

Frame::Frame(Mat rotation, int m) : A_(std::move(rotation)), m_(m) {
  if (A_.rows() != A_.cols() || m_ < 1 || m_ >= A_.rows()) {
    throw Error(ErrorKind::input, "Frame: rotation must be square with 1 <= m < dim");
  }
  const double orth = (A_.transpose() * A_ - Mat::Identity(A_.rows(), A_.rows())).cwiseAbs().maxCoeff();
  if (orth > 1e-12) throw Error(ErrorKind::input, "Frame: rotation is not orthogonal");
  if (std::abs(A_.determinant() - 1.0) > 1e-12) {
    throw Error(ErrorKind::input, "Frame: rotation must have det +1");
  }
}

Frame Frame::identity(int m, int n) { return Frame(Mat::Identity(m + n, m + n), m); }

Frame Frame::from_tilt(const Mat& L) {
  const int n = static_cast<int>(L.rows()), m = static_cast<int>(L.cols());
  Mat A(m + n, m + n);
  A.topRows(m) = orthonormalize_rows(graph_tangent_rows(L));
  Mat normals(n, m + n);
  normals.leftCols(m) = -L;
  normals.rightCols(n) = Mat::Identity(n, n);
  A.bottomRows(n) = orthonormalize_rows(normals);
  // Gram-Schmidt of a perturbation of Id stays in SO(m+n); flip defensively if
  // L is so large that the continuation argument fails.
  if (A.determinant() < 0) A.row(m + n - 1) *= -1.0;
  return Frame(A, m);
}

Frame Frame::from_plane_rotation(int m, int n, int a, int b, double angle) {
  Mat A = Mat::Identity(m + n, m + n);
  const double c = std::cos(angle), s = std::sin(angle);
  A(a, a) = c;
  A(a, b) = s;
  A(b, a) = -s;
  A(b, b) = c;
  return Frame(A, m);
}

Mat Frame::tilt() const {
  const Mat U = plane_basis();
  const Mat U1 = U.leftCols(m_);
  if (std::abs(U1.determinant()) < 1e-12) {
    throw Error(ErrorKind::precondition, "Frame::tilt: plane is vertical over pi_0");
  }
  return (U1.inverse() * U.rightCols(n())).transpose();
}

double Frame::distance(const Frame& other) const {
  return std::sqrt(std::max(0.0, mvector_dist2(plane_basis(), other.plane_basis())));
}

double Frame::distance_from_identity() const {
  Eigen::JacobiSVD<Mat> svd(A_ - Mat::Identity(dim(), dim()));
  return svd.singularValues()(0);
}

double mvector_inner(const Mat& U, const Mat& V) { return (U * V.transpose()).determinant(); }

double mvector_norm(const Mat& U) { return std::sqrt(std::max(0.0, (U * U.transpose()).determinant())); }

double mvector_dist2(const Mat& U, const Mat& V) {
  return 2.0 - 2.0 * mvector_inner(U, V) / (mvector_norm(U) * mvector_norm(V));
}

Mat graph_tangent_rows(const Mat& D) {
  const int n = static_cast<int>(D.rows()), m = static_cast<int>(D.cols());
  Mat V(m, m + n);
  V.leftCols(m) = Mat::Identity(m, m);
  V.rightCols(n) = D.transpose();
  return V;
}

Mat orthonormalize_rows(const Mat& U) {
  Mat Q = U;
  for (int i = 0; i < Q.rows(); ++i) {
    for (int k = 0; k < i; ++k) Q.row(i) -= Q.row(i).dot(Q.row(k)) * Q.row(k);
    const double nrm = Q.row(i).norm();
    if (nrm < 1e-14) throw Error(ErrorKind::numerical, "orthonormalize_rows: dependent rows");
    Q.row(i) /= nrm;
  }
  return Q;
}

}  // namespace cman
