#include "cman/polynomial.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "cman/config.hpp"

namespace cman {
namespace {

// Gauss-Legendre nodes and weights on [-1, 1] (Golub-Welsch).
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  Mat J = Mat::Zero(n, n);
  for (int i = 1; i < n; ++i) {
    const double b = i / std::sqrt(4.0 * i * i - 1.0);
    J(i, i - 1) = J(i - 1, i) = b;
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(J);
  x.resize(n);
  w.resize(n);
  for (int i = 0; i < n; ++i) {
    x[i] = es.eigenvalues()(i);
    w[i] = 2.0 * es.eigenvectors()(0, i) * es.eigenvectors()(0, i);
  }
}

double ipow(double x, int k) {
  double r = 1.0;
  for (int i = 0; i < k; ++i) r *= x;
  return r;
}

double factorial(int k) {
  double r = 1.0;
  for (int i = 2; i <= k; ++i) r *= i;
  return r;
}

// Unit directions and angular weights for S^{m-1} (m = 1: the two points).
void sphere_rule(int m, int angles, std::vector<Vec>& dirs, std::vector<double>& wts) {
  dirs.clear();
  wts.clear();
  if (m == 1) {
    dirs = {Vec::Constant(1, 1.0), Vec::Constant(1, -1.0)};
    wts = {1.0, 1.0};
  } else if (m == 2) {
    for (int a = 0; a < angles; ++a) {
      const double t = 2.0 * M_PI * (a + 0.5) / angles;
      Vec u(2);
      u << std::cos(t), std::sin(t);
      dirs.push_back(u);
      wts.push_back(2.0 * M_PI / angles);
    }
  } else if (m == 3) {
    std::vector<double> z, wz;
    gauss_legendre(std::max(4, angles / 2), z, wz);
    for (std::size_t i = 0; i < z.size(); ++i) {
      const double s = std::sqrt(std::max(0.0, 1.0 - z[i] * z[i]));
      for (int a = 0; a < angles; ++a) {
        const double t = 2.0 * M_PI * (a + 0.5) / angles;
        Vec u(3);
        u << s * std::cos(t), s * std::sin(t), z[i];
        dirs.push_back(u);
        wts.push_back(wz[i] * 2.0 * M_PI / angles);
      }
    }
  } else {
    throw Error(ErrorKind::input, "unit-ball quadrature supports m <= 3");
  }
}

// int_0^1 |p(t)| t^{m-1} dt for p(t) = S(q + t u): split at sign changes found on
// a uniform pre-grid, Gauss on each piece.
double ray_integral(const Polynomial& S, const Vec& q, const Vec& u, int m) {
  static thread_local std::vector<double> gx, gw;
  if (gx.empty()) gauss_legendre(10, gx, gw);
  auto p = [&](double t) { return S.value(Vec(q + t * u)); };
  const int pieces = 24;
  std::vector<double> cuts{0.0};
  double prev = p(0.0);
  for (int k = 1; k <= pieces; ++k) {
    const double t = double(k) / pieces;
    const double v = p(t);
    if ((prev < 0) != (v < 0) && prev != 0 && v != 0) {
      double lo = cuts.back() > (k - 1.0) / pieces ? cuts.back() : (k - 1.0) / pieces, hi = t;
      double flo = prev;
      for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = p(mid);
        if ((fm < 0) == (flo < 0)) {
          lo = mid;
          flo = fm;
        } else {
          hi = mid;
        }
      }
      cuts.push_back(0.5 * (lo + hi));
    }
    cuts.push_back(t);
    prev = v;
  }
  double s = 0.0;
  for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
    const double a = cuts[c], b = cuts[c + 1];
    if (b <= a) continue;
    for (std::size_t g = 0; g < gx.size(); ++g) {
      const double t = 0.5 * (a + b) + 0.5 * (b - a) * gx[g];
      s += 0.5 * (b - a) * gw[g] * std::abs(p(t)) * ipow(t, m - 1);
    }
  }
  return s;
}

}  // namespace

std::vector<MultiIndex> monomials(int m, int degree) {
  std::vector<MultiIndex> out;
  for (int d = 0; d <= degree; ++d) {
    MultiIndex a(m, 0);
    // Enumerate compositions of d into m parts, first entry descending.
    std::function<void(int, int)> rec = [&](int pos, int left) {
      if (pos == m - 1) {
        a[pos] = left;
        out.push_back(a);
        return;
      }
      for (int v = left; v >= 0; --v) {
        a[pos] = v;
        rec(pos + 1, left - v);
      }
    };
    rec(0, d);
  }
  return out;
}

double multinomial(const MultiIndex& beta) {
  int k = 0;
  double den = 1.0;
  for (int b : beta) {
    k += b;
    den *= factorial(b);
  }
  return factorial(k) / den;
}

Polynomial::Polynomial(int m, int degree, Vec center, double scale, Mat coeffs)
    : m_(m), degree_(degree), center_(std::move(center)), scale_(scale), mono_(monomials(m, degree)),
      coeffs_(std::move(coeffs)) {
  if (center_.size() != m_ || coeffs_.rows() != static_cast<Eigen::Index>(mono_.size()) || !(scale_ > 0)) {
    throw Error(ErrorKind::input, "Polynomial: shape mismatch");
  }
}

Polynomial Polynomial::fit(const Mat& X, const Mat& Y, int degree, const Vec& center, double scale) {
  const int m = static_cast<int>(X.cols());
  const auto mono = monomials(m, degree);
  if (X.rows() < static_cast<Eigen::Index>(mono.size())) {
    throw Error(ErrorKind::precondition, "Polynomial::fit: fewer samples than coefficients");
  }
  Mat V(X.rows(), mono.size());
  for (Eigen::Index r = 0; r < X.rows(); ++r) {
    const Vec w = (X.row(r).transpose() - center) / scale;
    for (std::size_t k = 0; k < mono.size(); ++k) {
      double v = 1.0;
      for (int j = 0; j < m; ++j) v *= ipow(w[j], mono[k][j]);
      V(r, k) = v;
    }
  }
  Mat C = V.colPivHouseholderQr().solve(Y);
  return Polynomial(m, degree, center, scale, std::move(C));
}

Polynomial Polynomial::fit(const GridFunction& f, const Vec2& q, double r, int degree) {
  std::vector<std::size_t> rows;
  for (std::size_t k = 0; k < f.node_count(); ++k)
    if ((f.node(k) - q).norm() <= r * (1 + 1e-12) && f.value(k).allFinite()) rows.push_back(k);
  Mat X(rows.size(), 2), Y(rows.size(), f.n());
  for (std::size_t t = 0; t < rows.size(); ++t) {
    X.row(t) = f.node(rows[t]).transpose();
    Y.row(t) = f.value(rows[t]).transpose();
  }
  return fit(X, Y, degree, Vec(q), r);
}

double Polynomial::value(const Vec& x, int c) const {
  const Vec w = (x - center_) / scale_;
  double s = 0.0;
  for (std::size_t k = 0; k < mono_.size(); ++k) {
    double v = coeffs_(k, c);
    if (v == 0.0) continue;
    for (int j = 0; j < m_; ++j) v *= ipow(w[j], mono_[k][j]);
    s += v;
  }
  return s;
}

double Polynomial::partial(const Vec& x, int c, const MultiIndex& beta) const {
  const Vec w = (x - center_) / scale_;
  int order = 0;
  for (int b : beta) order += b;
  double s = 0.0;
  for (std::size_t k = 0; k < mono_.size(); ++k) {
    double v = coeffs_(k, c);
    if (v == 0.0) continue;
    for (int j = 0; j < m_ && v != 0.0; ++j) {
      const int a = mono_[k][j], b = beta[j];
      if (a < b) {
        v = 0.0;
        break;
      }
      v *= factorial(a) / factorial(a - b) * ipow(w[j], a - b);
    }
    s += v;
  }
  return s / ipow(scale_, order);
}

double Polynomial::partial2(const Vec2& x, int c, int a, int b) const {
  return partial(Vec(x), c, MultiIndex{a, b});
}

void Polynomial::planar_jet(const Vec2& x, int c, int order, double* out) const {
  if (m_ != 2) throw Error(ErrorKind::input, "planar_jet: polynomial is not planar");
  const double wx = (x.x() - center_[0]) / scale_, wy = (x.y() - center_[1]) / scale_;
  double px[16], py[16];
  px[0] = py[0] = 1.0;
  for (int k = 1; k <= degree_; ++k) {
    px[k] = px[k - 1] * wx;
    py[k] = py[k - 1] * wy;
  }
  const int sz = jet_size(order);
  for (int t = 0; t < sz; ++t) out[t] = 0.0;
  for (std::size_t k = 0; k < mono_.size(); ++k) {
    const double v = coeffs_(k, c);
    if (v == 0.0) continue;
    const int ax = mono_[k][0], ay = mono_[k][1];
    for (int a = 0; a <= std::min(ax, order); ++a) {
      const double fa = factorial(ax) / factorial(ax - a) * px[ax - a];
      for (int b = 0; b <= std::min(ay, order - a); ++b) {
        out[jet_index(a, b)] += v * fa * factorial(ay) / factorial(ay - b) * py[ay - b];
      }
    }
  }
  double sc = 1.0;
  for (int l = 0; l <= order; ++l) {
    for (int b = 0; b <= l; ++b) out[jet_index(l - b, b)] /= sc;
    sc *= scale_;
  }
}

double Polynomial::derivative_norm(const Vec& x, int c, int k) const {
  double s = 0.0;
  for (const auto& beta : monomials(m_, k)) {
    int order = 0;
    for (int b : beta) order += b;
    if (order != k) continue;
    const double d = partial(x, c, beta);
    s += multinomial(beta) * d * d;
  }
  return std::sqrt(s);
}

double l1_norm_ball(const Polynomial& S, const Vec& q, double r, int angles) {
  std::vector<Vec> dirs;
  std::vector<double> wts;
  sphere_rule(S.m(), angles, dirs, wts);
  double s = 0.0;
  for (std::size_t d = 0; d < dirs.size(); ++d) s += wts[d] * ray_integral(S, q, r * dirs[d], S.m());
  return s * std::pow(r, S.m());
}

double poly_constant_oracle(int m, int degree, const PolyOracleOptions& opts) {
  if (m < 1 || m > 3 || degree < 0 || degree > 4) {
    throw Error(ErrorKind::input, "poly_constant_oracle: requires 1 <= m <= 3, 0 <= degree <= 4");
  }
  const auto mono = monomials(m, degree);
  const int nb = static_cast<int>(mono.size());
  // Fixed polar quadrature for the ascent.
  std::vector<Vec> dirs;
  std::vector<double> wts;
  sphere_rule(m, m == 1 ? 2 : std::max(16, opts.angles / 2), dirs, wts);
  std::vector<double> rx, rw;
  gauss_legendre(m == 1 ? 64 : 24, rx, rw);
  const int P = static_cast<int>(dirs.size() * rx.size());
  Mat Mq(P, nb);
  Vec wq(P);
  int row = 0;
  for (std::size_t d = 0; d < dirs.size(); ++d) {
    for (std::size_t g = 0; g < rx.size(); ++g, ++row) {
      const double t = 0.5 * (rx[g] + 1.0);
      wq[row] = wts[d] * 0.5 * rw[g] * ipow(t, m - 1);
      const Vec x = t * dirs[d];
      for (int k = 0; k < nb; ++k) {
        double v = 1.0;
        for (int j = 0; j < m; ++j) v *= ipow(x[j], mono[k][j]);
        Mq(row, k) = v;
      }
    }
  }
  // D^beta S(0) = beta! c_beta; |D^k S(0)|^2 = sum_{|beta| = k} multinomial * (beta! c_beta)^2.
  Vec dscale(nb);
  std::vector<int> order(nb);
  for (int k = 0; k < nb; ++k) {
    double f = 1.0;
    order[k] = 0;
    for (int b : mono[k]) {
      f *= factorial(b);
      order[k] += b;
    }
    dscale[k] = f * std::sqrt(multinomial(mono[k]));
  }
  auto numer = [&](const Vec& c, Vec* grad) {
    std::vector<double> sq(degree + 1, 0.0);
    for (int k = 0; k < nb; ++k) sq[order[k]] += (dscale[k] * c[k]) * (dscale[k] * c[k]);
    double s = 0.0;
    for (double v : sq) s += std::sqrt(v);
    if (grad) {
      grad->resize(nb);
      for (int k = 0; k < nb; ++k) {
        const double nk = std::sqrt(sq[order[k]]);
        (*grad)[k] = nk > 0 ? dscale[k] * dscale[k] * c[k] / nk : 0.0;
      }
    }
    return s;
  };
  auto denom = [&](const Vec& c, Vec* grad) {
    const Vec v = Mq * c;
    if (grad) *grad = Mq.transpose() * (wq.array() * v.array().sign()).matrix();
    return wq.dot(v.cwiseAbs());
  };
  auto ratio = [&](const Vec& c) { return numer(c, nullptr) / denom(c, nullptr); };

  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> normal;
  double best = -1.0;
  Vec best_c;
  for (int s = 0; s < opts.starts; ++s) {
    Vec c(nb);
    for (int k = 0; k < nb; ++k) c[k] = normal(rng);
    c /= denom(c, nullptr);
    double f = ratio(c);
    double step = 0.1;
    for (int it = 0; it < opts.max_iter; ++it) {
      Vec gn, gd;
      const double N = numer(c, &gn), D = denom(c, &gd);
      Vec g = (gn - (N / D) * gd) / D;
      // Tangent to the level set D = const (the ratio is 0-homogeneous).
      g -= (g.dot(c) / c.squaredNorm()) * c;
      const double gnorm = g.norm();
      if (gnorm < 1e-14) break;
      bool moved = false;
      for (int bt = 0; bt < 30; ++bt) {
        Vec t = c + (step * c.norm() / gnorm) * g;
        const double dt = denom(t, nullptr);
        if (!(dt > 0)) {
          step *= 0.5;
          continue;
        }
        t /= dt;
        const double ft = ratio(t);
        if (ft > f) {
          moved = ft - f > 1e-14 * f;
          c = t;
          f = ft;
          step = std::min(1.0, step * 1.5);
          break;
        }
        step *= 0.5;
      }
      if (!moved) break;
    }
    if (std::isfinite(f) && f > best) {
      best = f;
      best_c = c;
    }
  }
  if (!(best > 0)) throw Error(ErrorKind::numerical, "poly_constant_oracle: optimiser stagnated on every start");
  // Final value with exact root-split radial integration.
  const Polynomial S(m, degree, Vec::Zero(m), 1.0, Mat(best_c));
  return numer(best_c, nullptr) / l1_norm_ball(S, Vec::Zero(m), 1.0, std::max(opts.angles, 64));
}

std::vector<PolyBoundRow> poly_bound_check(const Polynomial& R, const Vec& q, double r, double C) {
  const double l1 = l1_norm_ball(R, q, r, 256);
  std::vector<PolyBoundRow> rows;
  for (int k = 0; k <= R.degree(); ++k) {
    PolyBoundRow row;
    row.k = k;
    row.value = R.derivative_norm(q, 0, k);
    row.bound = C / std::pow(r, R.m() + k) * l1;
    rows.push_back(row);
  }
  return rows;
}

PolyDerivativeBound poly_derivative_bound(const GridFunction& samples, int degree, double r,
                                          const Vec2& q, double C) {
  PolyDerivativeBound out;
  out.C = C;
  out.fit = Polynomial::fit(samples, q, r, degree);
  double res = 0.0, size = 0.0;
  for (std::size_t k = 0; k < samples.node_count(); ++k) {
    if ((samples.node(k) - q).norm() > r * (1 + 1e-12) || !samples.value(k).allFinite()) continue;
    const double v = samples.value(k)[0];
    res = std::max(res, std::abs(v - out.fit.value(Vec(samples.node(k)))));
    size = std::max(size, std::abs(v));
  }
  out.fit_residual = res;
  if (res > 1e-6 * std::max(size, 1e-300) && res > 1e-14) {
    throw Error(ErrorKind::precondition, "poly_derivative_bound: samples are not a polynomial of the given degree");
  }
  out.rows = poly_bound_check(out.fit, Vec(q), r, C);
  return out;
}

}  // namespace cman
