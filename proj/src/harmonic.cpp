#include "cman/harmonic.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <cmath>
#include <complex>
#include <limits>

#include "cman/config.hpp"

namespace cman {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace

MollifierKernel::MollifierKernel(double h, double rho) {
  reach = static_cast<int>(std::ceil(rho / h));
  const int side = 2 * reach + 1;
  weight.assign(static_cast<std::size_t>(side) * side, 0.0);
  double total = 0.0;
  for (int b = -reach; b <= reach; ++b) {
    for (int a = -reach; a <= reach; ++a) {
      const double r2 = (a * a + b * b) * (h / rho) * (h / rho);
      if (r2 >= 1.0) continue;
      const double v = std::exp(-1.0 / (1.0 - r2));
      weight[(b + reach) * side + (a + reach)] = v;
      total += v;
    }
  }
  second_moment = 0.0;
  for (int b = -reach; b <= reach; ++b) {
    for (int a = -reach; a <= reach; ++a) {
      double& w = weight[(b + reach) * side + (a + reach)];
      w /= total;
      second_moment += w * (a * a + b * b) * (h / rho) * (h / rho);
    }
  }
}

GridFunction mollify(const GridFunction& f, double rho) {
  const double h = f.h();
  if (rho < 2.0 * h) throw Error(ErrorKind::precondition, "mollify: rho < 2h, kernel under-resolved");
  if (rho >= f.radius()) throw Error(ErrorKind::precondition, "mollify: rho exceeds the domain radius");
  const MollifierKernel k(h, rho);
  struct Tap {
    int a, b;
    double w;
  };
  std::vector<Tap> taps;
  for (int b = -k.reach; b <= k.reach; ++b)
    for (int a = -k.reach; a <= k.reach; ++a)
      if (k.at(a, b) > 0) taps.push_back({a, b, k.at(a, b)});

  GridFunction out(f.center(), f.radius() - rho, h, f.n());
  const int shift = f.half() - out.half();
  std::vector<double> acc(f.n());
  for (int j = 0; j < out.side(); ++j) {
    for (int i = 0; i < out.side(); ++i) {
      const int fi = i + shift, fj = j + shift;
      std::fill(acc.begin(), acc.end(), 0.0);
      bool ok = true;
      for (const Tap& t : taps) {
        const int ii = fi - t.a, jj = fj - t.b;
        if (!f.in_lattice(ii, jj)) {
          ok = false;
          break;
        }
        for (int c = 0; c < f.n(); ++c) acc[c] += t.w * f.at(ii, jj, c);
      }
      for (int c = 0; c < f.n() && ok; ++c) ok = std::isfinite(acc[c]);
      if (!ok) {
        if (out.in_ball(i, j)) {
          throw Error(ErrorKind::precondition, "mollify: kernel touches undefined samples");
        }
        continue;
      }
      for (int c = 0; c < f.n(); ++c) out.at(i, j, c) = acc[c];
    }
  }
  return out;
}

HarmonicSolve harmonic_extend(const std::function<Vec(const Vec2&)>& boundary, const Vec2& q,
                              double R, double h, int n, BoundaryScheme scheme) {
  if (R < 4.0 * h) throw Error(ErrorKind::precondition, "harmonic_extend: ball radius below 4h");
  HarmonicSolve out{GridFunction(q, R, h, n), 0.0, 0};
  GridFunction& u = out.value;
  const int side = u.side();
  const double on_circle = 1e-9 * h;

  // Unknown numbering; nodes on the circle (to 1e-9 h) take boundary data.
  std::vector<int> id(u.node_count(), -1);
  int count = 0;
  for (int j = 0; j < side; ++j) {
    for (int i = 0; i < side; ++i) {
      const double d = (u.node(i, j) - q).norm();
      if (d < R - on_circle) {
        id[u.index(i, j)] = count++;
      } else if (d <= R + on_circle) {
        u.value(u.index(i, j)) = boundary(u.node(i, j));
      }
    }
  }
  out.unknowns = static_cast<std::size_t>(count);

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(count) * 5);
  Mat rhs = Mat::Zero(count, n);

  // Distance (in units of h) from x along direction e to the circle.
  auto crossing = [&](const Vec2& x, const Vec2& e) {
    const Vec2 d = x - q;
    const double bq = d.dot(e), cq = d.squaredNorm() - R * R;
    return (-bq + std::sqrt(bq * bq - cq)) / h;
  };

  const int di[4] = {1, -1, 0, 0}, dj[4] = {0, 0, 1, -1};
  for (int j = 0; j < side; ++j) {
    for (int i = 0; i < side; ++i) {
      const int row = id[u.index(i, j)];
      if (row < 0) continue;
      const Vec2 x = u.node(i, j);
      double diag = 0.0;
      for (int axis = 0; axis < 2; ++axis) {
        // Arms along +e and -e: spacing (in h) and the neighbour it lands on.
        double arm[2];
        int col[2];
        Vec g[2];
        for (int s = 0; s < 2; ++s) {
          const int k = 2 * axis + s;
          const int ii = i + di[k], jj = j + dj[k];
          const int nb = u.in_lattice(ii, jj) ? id[u.index(ii, jj)] : -1;
          if (nb >= 0) {
            arm[s] = 1.0;
            col[s] = nb;
          } else {
            const Vec2 e(di[k], dj[k]);
            arm[s] = std::min(1.0, crossing(x, e));
            col[s] = -1;
            g[s] = boundary(x + arm[s] * h * e);
          }
        }
        if (scheme == BoundaryScheme::shortley_weller) {
          const double a = arm[0], b = arm[1];
          const double wa = 2.0 / (a * (a + b)), wb = 2.0 / (b * (a + b));
          diag -= wa + wb;
          const double w[2] = {wa, wb};
          for (int s = 0; s < 2; ++s) {
            if (col[s] >= 0) {
              trip.emplace_back(row, col[s], w[s]);
            } else {
              rhs.row(row) -= w[s] * g[s].transpose();
            }
          }
        } else {
          diag -= 2.0;
          for (int s = 0; s < 2; ++s) {
            if (col[s] >= 0) {
              trip.emplace_back(row, col[s], 1.0);
            } else {
              // ghost = u0 + (g - u0) / theta
              diag += 1.0 - 1.0 / arm[s];
              rhs.row(row) -= (g[s] / arm[s]).transpose();
            }
          }
        }
      }
      trip.emplace_back(row, row, diag);
    }
  }

  Eigen::SparseMatrix<double> A(count, count);
  A.setFromTriplets(trip.begin(), trip.end());
  A.makeCompressed();
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
  lu.compute(A);
  if (lu.info() != Eigen::Success) throw Error(ErrorKind::numerical, "harmonic_extend: factorisation failed");
  const Mat sol = lu.solve(rhs);
  if (lu.info() != Eigen::Success || !sol.allFinite()) {
    throw Error(ErrorKind::numerical, "harmonic_extend: solve failed");
  }
  const Mat res = (A * sol - rhs) / (h * h);
  out.residual = count > 0 ? res.cwiseAbs().maxCoeff() : 0.0;
  double scale = 1.0;
  if (count > 0) scale = std::max(1.0, sol.cwiseAbs().maxCoeff());
  if (out.residual > 1e-9 * scale) {
    throw Error(ErrorKind::numerical, "harmonic_extend: residual above 1e-9 after solve");
  }
  for (std::size_t idx = 0; idx < u.node_count(); ++idx)
    if (id[idx] >= 0) u.value(idx) = sol.row(id[idx]).transpose();
  return out;
}

HarmonicSolve harmonic_extend(const GridFunction& f, const Vec2& q, double R, BoundaryScheme scheme) {
  if ((q - f.center()).norm() + R > f.radius() + 1e-12) {
    throw Error(ErrorKind::precondition, "harmonic_extend: boundary circle leaves the data domain");
  }
  const Vec2 offset = (q - f.center()) / f.h();
  if ((offset - offset.array().round().matrix()).norm() > 1e-9) {
    throw Error(ErrorKind::input, "harmonic_extend: centre must be a lattice node of f");
  }
  auto bnd = [&f](const Vec2& x) {
    Vec v;
    if (!f.interpolate(x, v)) throw Error(ErrorKind::precondition, "harmonic_extend: boundary trace undefined");
    return v;
  };
  return harmonic_extend(bnd, q, R, f.h(), f.n(), scheme);
}

HarmonicPolynomial::HarmonicPolynomial(Vec2 center, double scale, int degree, Mat coeffs)
    : center_(center), scale_(scale), degree_(degree), coeffs_(std::move(coeffs)) {
  if (coeffs_.rows() != 2 * degree_ + 1) throw Error(ErrorKind::input, "HarmonicPolynomial: coefficient shape");
}

HarmonicPolynomial HarmonicPolynomial::fit(const GridFunction& f, const Vec2& q, double R, int degree) {
  std::vector<std::size_t> rows;
  for (std::size_t idx = 0; idx < f.node_count(); ++idx) {
    if ((f.node(idx) - q).norm() > R * (1 + 1e-12)) continue;
    if (!f.value(idx).allFinite()) continue;
    rows.push_back(idx);
  }
  const int nb = 2 * degree + 1;
  if (static_cast<int>(rows.size()) < 2 * nb) {
    throw Error(ErrorKind::precondition, "HarmonicPolynomial::fit: too few samples");
  }
  Mat V(rows.size(), nb);
  Mat Y(rows.size(), f.n());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const Vec2 w = (f.node(rows[r]) - q) / R;
    const std::complex<double> z(w.x(), w.y());
    std::complex<double> p(1.0, 0.0);
    V(r, 0) = 1.0;
    for (int k = 1; k <= degree; ++k) {
      p *= z;
      V(r, 2 * k - 1) = p.real();
      V(r, 2 * k) = p.imag();
    }
    Y.row(r) = f.value(rows[r]).transpose();
  }
  Mat C = V.colPivHouseholderQr().solve(Y);
  return HarmonicPolynomial(q, R, degree, std::move(C));
}

double HarmonicPolynomial::partial(const Vec2& x, int c, int a, int b) const {
  const Vec2 w = (x - center_) / scale_;
  const std::complex<double> z(w.x(), w.y());
  const int order = a + b;
  // d^a_x d^b_y z^k = i^b k!/(k-order)! z^{k-order}
  std::complex<double> ib(1.0, 0.0);
  for (int t = 0; t < b; ++t) ib *= std::complex<double>(0.0, 1.0);
  double s = order == 0 ? coeffs_(0, c) : 0.0;
  std::complex<double> zp(1.0, 0.0);  // z^{k - order}
  for (int k = 1; k <= degree_; ++k) {
    if (k < order) continue;
    if (k > order) zp *= z;
    double fall = 1.0;
    for (int t = 0; t < order; ++t) fall *= k - t;
    const std::complex<double> d = ib * fall * zp;
    s += coeffs_(2 * k - 1, c) * d.real() + coeffs_(2 * k, c) * d.imag();
  }
  return s / std::pow(scale_, order);
}

Vec HarmonicPolynomial::value(const Vec2& x) const {
  Vec v(n());
  for (int c = 0; c < n(); ++c) v[c] = partial(x, c, 0, 0);
  return v;
}

Mat HarmonicPolynomial::jacobian(const Vec2& x) const {
  Mat J(n(), 2);
  for (int c = 0; c < n(); ++c) {
    J(c, 0) = partial(x, c, 1, 0);
    J(c, 1) = partial(x, c, 0, 1);
  }
  return J;
}

double HarmonicPolynomial::dirichlet_integral(double r) const {
  const double t = r / scale_;
  double s = 0.0;
  for (int c = 0; c < n(); ++c) {
    double tk = 1.0;
    for (int k = 1; k <= degree_; ++k) {
      tk *= t * t;
      const double a = coeffs_(2 * k - 1, c), b = coeffs_(2 * k, c);
      s += M_PI * k * (a * a + b * b) * tk;
    }
  }
  return s;
}

}  // namespace cman
