#include "cman/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "cman/config.hpp"

namespace cman {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Fornberg's recursion: weights of the order-`deriv` derivative at 0 for the
// integer offsets in `pts` (unit spacing).
std::vector<double> fd_weights(const std::vector<int>& pts, int deriv) {
  const int n = static_cast<int>(pts.size());
  std::vector<std::vector<double>> c(n, std::vector<double>(deriv + 1, 0.0));
  double c1 = 1.0;
  double c4 = pts[0];
  c[0][0] = 1.0;
  for (int i = 1; i < n; ++i) {
    const int mn = std::min(i, deriv);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = pts[i];
    for (int j = 0; j < i; ++j) {
      const double c3 = pts[i] - pts[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k) c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
        c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
      }
      for (int k = mn; k >= 1; --k) c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
      c[j][0] = c4 * c[j][0] / c3;
    }
    c1 = c2;
  }
  std::vector<double> w(n);
  for (int i = 0; i < n; ++i) w[i] = c[i][deriv];
  return w;
}

struct Stencil {
  std::vector<int> offsets;
  std::vector<double> weights;
};

// Second-order stencil for the deriv-th derivative at lattice index i along an
// axis of length len; ok(k) says whether index k carries a defined value.
template <class Ok>
Stencil axis_stencil(int i, int len, int deriv, Ok ok) {
  if (deriv == 0) return {{0}, {1.0}};
  const int w = (deriv + 1) / 2;
  auto window_ok = [&](int lo, int count) {
    for (int k = lo; k < lo + count; ++k)
      if (k < 0 || k >= len || !ok(k)) return false;
    return true;
  };
  std::vector<int> pts;
  if (window_ok(i - w, 2 * w + 1)) {
    for (int k = -w; k <= w; ++k) pts.push_back(k);
  } else {
    const int count = deriv + 2;
    int lo = -1;
    for (int shift = 0; shift < count && lo < 0; ++shift) {
      for (int s : {i - count / 2 + shift, i - count / 2 - shift}) {
        if (window_ok(s, count)) {
          lo = s;
          break;
        }
      }
    }
    if (lo < 0) return {};
    for (int k = lo; k < lo + count; ++k) pts.push_back(k - i);
  }
  // Only a handful of distinct stencils occur; cache their weights.
  thread_local std::map<std::pair<int, std::vector<int>>, std::vector<double>> cache;
  auto key = std::make_pair(deriv, pts);
  auto it = cache.find(key);
  if (it == cache.end()) it = cache.emplace(key, fd_weights(pts, deriv)).first;
  return {std::move(pts), it->second};
}

}  // namespace

GridFunction::GridFunction(Vec2 center, double radius, double h, int n)
    : center_(center), radius_(radius), h_(h), n_(n) {
  if (!(h > 0) || !(radius > 0) || n < 1) {
    throw Error(ErrorKind::input, "GridFunction: need h > 0, radius > 0, n >= 1");
  }
  half_ = static_cast<int>(std::ceil(radius / h - 1e-9));
  values_.assign(node_count() * n_, kNaN);
}

GridFunction GridFunction::with_radius(double radius) const {
  GridFunction out = *this;
  out.radius_ = radius;
  return out;
}

bool GridFunction::in_ball(int i, int j, double slack) const {
  const double di = i - half_, dj = j - half_;
  return h_ * std::sqrt(di * di + dj * dj) <= radius_ * (1.0 + slack);
}

void GridFunction::fill(const std::function<Vec(const Vec2&)>& fn) {
  for (int j = 0; j < side(); ++j)
    for (int i = 0; i < side(); ++i) value(index(i, j)) = fn(node(i, j));
}

std::array<int, 2> GridFunction::nearest(const Vec2& x) const {
  const Vec2 r = (x - center_) / h_;
  return {static_cast<int>(std::lround(r.x())) + half_, static_cast<int>(std::lround(r.y())) + half_};
}

bool GridFunction::interpolate(const Vec2& x, Vec& out) const {
  const Vec2 r = (x - center_) / h_ + Vec2(half_, half_);
  const int i0 = static_cast<int>(std::floor(r.x()));
  const int j0 = static_cast<int>(std::floor(r.y()));
  const double tx = r.x() - i0, ty = r.y() - j0;
  if (i0 < 0 || j0 < 0 || i0 >= side() || j0 >= side()) return false;
  out.resize(n_);
  auto defined = [&](int i, int j) {
    if (!in_lattice(i, j)) return false;
    for (int c = 0; c < n_; ++c)
      if (!std::isfinite(at(i, j, c))) return false;
    return true;
  };
  bool cubic = true;
  for (int dj = -1; dj <= 2 && cubic; ++dj)
    for (int di = -1; di <= 2 && cubic; ++di) cubic = defined(i0 + di, j0 + dj);
  if (cubic) {
    auto cr = [](double t) {
      // Catmull-Rom weights for offsets -1, 0, 1, 2.
      const double t2 = t * t, t3 = t2 * t;
      return std::array<double, 4>{-0.5 * t3 + t2 - 0.5 * t, 1.5 * t3 - 2.5 * t2 + 1.0,
                                   -1.5 * t3 + 2.0 * t2 + 0.5 * t, 0.5 * t3 - 0.5 * t2};
    };
    const auto wx = cr(tx), wy = cr(ty);
    for (int c = 0; c < n_; ++c) {
      double s = 0.0;
      for (int dj = 0; dj < 4; ++dj)
        for (int di = 0; di < 4; ++di) s += wx[di] * wy[dj] * at(i0 + di - 1, j0 + dj - 1, c);
      out[c] = s;
    }
    return true;
  }
  const int i1 = std::min(i0 + 1, side() - 1), j1 = std::min(j0 + 1, side() - 1);
  if (!defined(i0, j0) || !defined(i1, j0) || !defined(i0, j1) || !defined(i1, j1)) return false;
  for (int c = 0; c < n_; ++c) {
    out[c] = (1 - tx) * (1 - ty) * at(i0, j0, c) + tx * (1 - ty) * at(i1, j0, c) +
             (1 - tx) * ty * at(i0, j1, c) + tx * ty * at(i1, j1, c);
  }
  return true;
}

double GridFunction::partial(int i, int j, int c, int a, int b) const {
  const Stencil sx = axis_stencil(i, side(), a, [&](int k) { return std::isfinite(at(k, j, c)); });
  const Stencil sy = axis_stencil(j, side(), b, [&](int k) { return std::isfinite(at(i, k, c)); });
  if (sx.offsets.empty() || sy.offsets.empty()) return kNaN;
  double s = 0.0;
  for (std::size_t q = 0; q < sy.offsets.size(); ++q) {
    for (std::size_t p = 0; p < sx.offsets.size(); ++p) {
      const int ii = i + sx.offsets[p], jj = j + sy.offsets[q];
      if (!in_lattice(ii, jj)) return kNaN;
      s += sx.weights[p] * sy.weights[q] * at(ii, jj, c);
    }
  }
  return s / std::pow(h_, a + b);
}

Mat GridFunction::jacobian(int i, int j) const {
  Mat J(n_, 2);
  for (int c = 0; c < n_; ++c) {
    if (i > 0 && j > 0 && i + 1 < side() && j + 1 < side()) {
      const double l = at(i - 1, j, c), r = at(i + 1, j, c), d = at(i, j - 1, c), u = at(i, j + 1, c);
      if (std::isfinite(l) && std::isfinite(r) && std::isfinite(d) && std::isfinite(u)) {
        J(c, 0) = (r - l) / (2 * h_);
        J(c, 1) = (u - d) / (2 * h_);
        continue;
      }
    }
    J(c, 0) = partial(i, j, c, 1, 0);
    J(c, 1) = partial(i, j, c, 0, 1);
  }
  return J;
}

double GridFunction::lipschitz_local(int reach, std::span<const std::uint8_t> mask) const {
  double best = 0.0;
  auto usable = [&](int i, int j) {
    if (!in_lattice(i, j) || !in_ball(i, j)) return false;
    if (!mask.empty() && !mask[index(i, j)]) return false;
    return std::isfinite(at(i, j, 0));
  };
  for (int j = 0; j < side(); ++j) {
    for (int i = 0; i < side(); ++i) {
      if (!usable(i, j)) continue;
      for (int dj = 0; dj <= reach; ++dj) {
        for (int di = -reach; di <= reach; ++di) {
          if (dj == 0 && di <= 0) continue;
          if (di * di + dj * dj > reach * reach) continue;
          if (!usable(i + di, j + dj)) continue;
          const double dist = h_ * std::sqrt(double(di * di + dj * dj));
          const double diff = (value(index(i, j)) - value(index(i + di, j + dj))).norm();
          best = std::max(best, diff / dist);
        }
      }
    }
  }
  return best;
}

bool GridFunction::all_finite_in_ball() const {
  for (int j = 0; j < side(); ++j)
    for (int i = 0; i < side(); ++i)
      if (in_ball(i, j))
        for (int c = 0; c < n_; ++c)
          if (!std::isfinite(at(i, j, c))) return false;
  return true;
}

std::vector<double> region_weights(const GridFunction& grid,
                                   const std::function<double(const Vec2&)>& level,
                                   const QuadratureOptions& opts) {
  const double h = grid.h();
  const double band = 0.5 * std::sqrt(2.0) * h * opts.level_lipschitz;
  const int S = std::max(1, opts.subsamples);
  std::vector<double> w(grid.node_count(), 0.0);
  for (int j = 0; j < grid.side(); ++j) {
    for (int i = 0; i < grid.side(); ++i) {
      const Vec2 x = grid.node(i, j);
      const double l = level(x);
      if (l <= -band) {
        w[grid.index(i, j)] = h * h;
      } else if (l < band) {
        int inside = 0;
        for (int b = 0; b < S; ++b)
          for (int a = 0; a < S; ++a) {
            const Vec2 y = x + h * Vec2((a + 0.5) / S - 0.5, (b + 0.5) / S - 0.5);
            if (level(y) < 0.0) ++inside;
          }
        w[grid.index(i, j)] = h * h * inside / double(S * S);
      }
    }
  }
  return w;
}

std::vector<double> disk_weights(const GridFunction& grid, const Vec2& q, double r,
                                 const QuadratureOptions& opts) {
  QuadratureOptions o = opts;
  o.level_lipschitz = 1.0;
  return region_weights(grid, [&](const Vec2& x) { return (x - q).norm() - r; }, o);
}

double sum_weights(std::span<const double> w) {
  double s = 0.0;
  for (double v : w) s += v;
  return s;
}

}  // namespace cman
