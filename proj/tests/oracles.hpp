#pragma once

// Independent reference computations for the tests. Nothing here calls into
// the library's quadrature, partition or maximal-function code.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

struct Gauss {
  std::vector<double> x, w;  // nodes and weights on [-1, 1]
};

// Gauss-Legendre rule by Newton iteration on P_n.
inline Gauss gauss_legendre(int n) {
  Gauss g;
  g.x.resize(n);
  g.w.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    g.x[i] = x;
    g.w[i] = 2.0 / ((1 - x * x) * dp * dp);
  }
  return g;
}

// int over B_r(q) of f, Gauss in the radius and trapezoid (spectral for
// periodic integrands) in the angle.
inline double disk_integral(const std::function<double(double, double)>& f, double qx, double qy, double r,
                            int nr = 48, int nt = 256) {
  const Gauss g = gauss_legendre(nr);
  double s = 0.0;
  for (int i = 0; i < nr; ++i) {
    const double rho = 0.5 * r * (g.x[i] + 1);
    double ring = 0.0;
    for (int t = 0; t < nt; ++t) {
      const double th = 2 * std::numbers::pi * t / nt;
      ring += f(qx + rho * std::cos(th), qy + rho * std::sin(th));
    }
    s += 0.5 * r * g.w[i] * rho * ring * (2 * std::numbers::pi / nt);
  }
  return s;
}

// Cylindrical excess over B_r(q) of a scalar graph with gradient grad(x, y).
inline double graph_excess(const std::function<Eigen::Vector2d(double, double)>& grad, double qx, double qy,
                           double r) {
  const double area = disk_integral(
      [&](double x, double y) { return std::sqrt(1 + grad(x, y).squaredNorm()) - 1; }, qx, qy, r);
  return area / (std::numbers::pi * r * r);
}

inline double tilted_plane_excess(double l1, double l2) { return std::sqrt(1 + l1 * l1 + l2 * l2) - 1; }

// eps (x1^2 - x2^2) over B_r(0): |Df|^2 = 4 eps^2 |x|^2, integrated radially.
inline double harmonic_quadratic_excess(double eps, double r) {
  const double a = 4 * eps * eps * r * r;
  return 2 * (std::pow(1 + a, 1.5) - 1) / (3 * a) - 1;
}

// Maximal function by direct sums: for each node x of the square lattice
// (side nodes, spacing h, centre index c) with |x - q| <= r, the sup over the
// node value and the means over lattice disks of each ladder radius that fits
// in B_r(q). Density counts as zero outside B_r(q).
inline std::vector<double> brute_maximal(const std::vector<double>& dens, int side, double h, double cx, double cy,
                                         double qx, double qy, double r, const std::vector<double>& ladder) {
  const int half = side / 2;
  auto pos = [&](int i, int j) { return Eigen::Vector2d(cx + h * (i - half), cy + h * (j - half)); };
  const Eigen::Vector2d q(qx, qy);
  auto inside = [&](int i, int j) { return (pos(i, j) - q).norm() <= r * (1 + 1e-12); };
  std::vector<double> out(dens.size(), std::nan(""));
  for (int j = 0; j < side; ++j) {
    for (int i = 0; i < side; ++i) {
      if (!inside(i, j)) continue;
      const double dist = (pos(i, j) - q).norm();
      double best = dens[j * side + i];
      for (double s : ladder) {
        if (dist + s > r * (1 + 1e-12)) continue;
        const double t2 = (s / h) * (s / h);
        double sum = 0.0;
        long count = 0;
        for (int b = 0; b < side; ++b) {
          for (int a = 0; a < side; ++a) {
            const double di = a - i, dj = b - j;
            if (di * di + dj * dj > t2 * (1 + 1e-12)) continue;
            ++count;
            if (inside(a, b)) sum += dens[b * side + a];
          }
        }
        best = std::max(best, sum / count);
      }
      out[j * side + i] = best;
    }
  }
  return out;
}

// Cubes of side 2 * 2^-k centred at 2^-k Z^m meeting [-2^-n0, 2^-n0]^m, by
// enumerating candidate indices.
inline long cube_count(int k, int n0, int m) {
  const double s = std::ldexp(1.0, -k), Q = std::ldexp(1.0, -n0);
  long per_axis = 0;
  for (long i = -(4L << (k - n0)) - 8; i <= (4L << (k - n0)) + 8; ++i) {
    const double lo = s * i - s, hi = s * i + s;
    if (hi >= -Q && lo <= Q) ++per_axis;
  }
  long total = 1;
  for (int d = 0; d < m; ++d) total *= per_axis;
  return total;
}

// Exact max over all node pairs with |q - q'| >= min_sep of
// |F(q) - F(q')| / |q - q'|^alpha for a field given at points.
inline double holder_all_pairs(const std::vector<Eigen::Vector2d>& pts, const std::vector<Eigen::VectorXd>& vals,
                               double alpha, double min_sep) {
  double best = 0.0;
  for (std::size_t a = 0; a < pts.size(); ++a) {
    for (std::size_t b = a + 1; b < pts.size(); ++b) {
      const double d = (pts[a] - pts[b]).norm();
      if (d < min_sep) continue;
      best = std::max(best, (vals[a] - vals[b]).norm() / std::pow(d, alpha));
    }
  }
  return best;
}

// Least-squares slope of log y against log x.
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// max over a x + b of (|a| + |b|) / int_{-1}^{1} |a x + b|, by a scan of the
// direction (a, b) = (cos t, sin t), t in [0, pi).
inline double poly_constant_m1_deg1(int samples = 10000) {
  double best = 0.0;
  for (int s = 0; s < samples; ++s) {
    const double t = std::numbers::pi * (s + 0.5) / samples;
    const double a = std::abs(std::cos(t)), b = std::abs(std::sin(t));
    const double l1 = b >= a ? 2 * b : a + b * b / a;
    best = std::max(best, (a + b) / l1);
  }
  return best;
}

}  // namespace oracle
