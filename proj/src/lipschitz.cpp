#include "cman/lipschitz.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cman/excess.hpp"
#include "cman/harmonic.hpp"

namespace cman {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
// Excess values below this are indistinguishable from quadrature round-off;
// thresholds built from powers of E use it as a floor.
constexpr double kExcessFloor = 1e-13;

bool same_frame(const Frame& a, const Frame& b) {
  return (a.rotation() - b.rotation()).cwiseAbs().maxCoeff() < 1e-14;
}

bool lattice_aligned(const GridFunction& g, const Vec2& q) {
  const Vec2 off = (q - g.center()) / g.h();
  return (off - off.array().round().matrix()).norm() < 1e-9;
}

// The current over the cylinder's plane on a lattice centred at q.
SampledCurrent centred_chart(const SampledCurrent& T, const Frame& plane, const Vec2& q, double r) {
  const GridFunction& b = T.base;
  if (!same_frame(plane, T.frame) || !lattice_aligned(b, q)) {
    return chart_over_plane(T, plane, q, r, b.h());
  }
  if ((q - b.center()).norm() + r > b.radius() * (1 + 1e-12)) {
    throw Error(ErrorKind::precondition, "cylinder exits the sampled domain");
  }
  SampledCurrent out;
  out.frame = T.frame;
  out.source = T.source;
  out.base = GridFunction(q, r, b.h(), b.n());
  const Vec2 off = (q - b.center()) / b.h();
  const int si = static_cast<int>(std::lround(off.x())) + b.half() - out.base.half();
  const int sj = static_cast<int>(std::lround(off.y())) + b.half() - out.base.half();
  for (int j = 0; j < out.base.side(); ++j)
    for (int i = 0; i < out.base.side(); ++i)
      if (b.in_lattice(i + si, j + sj)) out.base.value(out.base.index(i, j)) = b.value(b.index(i + si, j + sj));
  for (const auto& d : T.defects)
    if ((d.position.head<2>() - q).norm() <= r) out.defects.push_back(d);
  out.refresh_mask();
  return out;
}

std::vector<std::uint8_t> ball_mask(const GridFunction& g, const Vec2& q, double r) {
  std::vector<std::uint8_t> m(g.node_count(), 0);
  for (std::size_t k = 0; k < g.node_count(); ++k) m[k] = (g.node(k) - q).norm() <= r * (1 + 1e-12);
  return m;
}

}  // namespace

std::vector<double> excess_density(const SampledCurrent& T) {
  const GridFunction& g = T.base;
  std::vector<double> d(g.node_count(), kNaN);
  for (int j = 0; j < g.side(); ++j) {
    for (int i = 0; i < g.side(); ++i) {
      if (!g.in_ball(i, j)) continue;
      const Mat D = g.jacobian(i, j);
      if (!D.allFinite()) continue;
      const Eigen::Matrix2d G = Eigen::Matrix2d::Identity() + D.transpose() * D;
      d[g.index(i, j)] = std::sqrt(G.determinant()) - 1.0;
    }
  }
  const double h2 = g.h() * g.h();
  for (const auto& s : T.defects) {
    const auto [i, j] = g.nearest(s.position.head<2>());
    if (g.in_lattice(i, j) && g.in_ball(i, j)) d[g.index(i, j)] += s.mass / h2;
  }
  return d;
}

std::vector<double> dyadic_ladder(double h, double r) {
  std::vector<double> out;
  for (double s = h; s <= r * (1 + 1e-12); s *= 2) out.push_back(s);
  return out;
}

MaximalField maximal_excess(const SampledCurrent& T, const Region& C, std::vector<double> ladder) {
  if (C.kind != Region::Kind::cylinder) throw Error(ErrorKind::input, "maximal_excess: region is not a cylinder");
  if (!same_frame(C.frame, T.frame)) {
    throw Error(ErrorKind::input, "maximal_excess: cylinder must be over the current's plane");
  }
  const GridFunction& g = T.base;
  const Vec2 q = C.center.head<2>();
  const double r = C.radius, h = g.h();
  if ((q - g.center()).norm() + r > g.radius() * (1 + 1e-12)) {
    throw Error(ErrorKind::precondition, "maximal_excess: cylinder exits the sampled domain");
  }
  if (ladder.empty()) ladder = dyadic_ladder(h, r);
  for (double s : ladder) {
    if (!(s > 0) || s > r * (1 + 1e-12)) throw Error(ErrorKind::input, "maximal_excess: ladder radii must lie in (0, r]");
  }
  std::sort(ladder.begin(), ladder.end());

  const std::vector<double> dens = excess_density(T);
  const auto inside = ball_mask(g, q, r);
  const int side = g.side();
  // Row prefix sums of the density (zero outside the ball).
  std::vector<double> pre(static_cast<std::size_t>(side) * (side + 1), 0.0);
  for (int j = 0; j < side; ++j) {
    double acc = 0.0;
    for (int i = 0; i < side; ++i) {
      const std::size_t k = g.index(i, j);
      if (inside[k]) {
        if (!std::isfinite(dens[k])) throw Error(ErrorKind::precondition, "maximal_excess: undefined samples in cylinder");
        acc += dens[k];
      }
      pre[static_cast<std::size_t>(j) * (side + 1) + i + 1] = acc;
    }
  }
  auto row_sum = [&](int j, int lo, int hi) {
    const std::size_t base = static_cast<std::size_t>(j) * (side + 1);
    return pre[base + hi + 1] - pre[base + lo];
  };

  MaximalField out{GridFunction(g.center(), g.radius(), h, 1), ladder};
  for (int j = 0; j < side; ++j) {
    for (int i = 0; i < side; ++i) {
      const std::size_t k = g.index(i, j);
      if (!inside[k]) continue;
      const double dist = (g.node(i, j) - q).norm();
      double best = dens[k];  // radius -> 0 limit: the node itself
      for (double s : ladder) {
        if (dist + s > r * (1 + 1e-12)) break;
        const double t = s / h;
        const int S = static_cast<int>(std::floor(t + 1e-9));
        double sum = 0.0;
        long count = 0;
        for (int dj = -S; dj <= S; ++dj) {
          const int w = static_cast<int>(std::floor(std::sqrt(std::max(0.0, t * t - dj * dj)) + 1e-9));
          sum += row_sum(j + dj, i - w, i + w);
          count += 2 * w + 1;
        }
        best = std::max(best, sum / count);
      }
      out.M.at(i, j, 0) = best;
    }
  }
  return out;
}

GoodSet good_set(const MaximalField& field, double threshold, int m) {
  if (!(threshold > 0)) throw Error(ErrorKind::input, "good_set: threshold must be > 0");
  GoodSet s;
  const auto& M = field.M;
  s.K.assign(M.node_count(), 0);
  s.L.assign(M.node_count(), 0);
  const double enlarged = threshold / std::pow(2.0, m);
  for (std::size_t k = 0; k < M.node_count(); ++k) {
    const double v = M.value(k)[0];
    if (!std::isfinite(v)) continue;
    s.K[k] = v <= threshold;
    s.L[k] = v > enlarged;
  }
  return s;
}

GridFunction lipschitz_extend(const GridFunction& g, std::span<const std::uint8_t> K, double lip,
                              double* used_lip) {
  if (K.size() != g.node_count()) throw Error(ErrorKind::input, "lipschitz_extend: mask size mismatch");
  if (!(lip >= 0)) throw Error(ErrorKind::input, "lipschitz_extend: negative Lipschitz bound");
  std::vector<std::size_t> good;
  for (std::size_t k = 0; k < g.node_count(); ++k) {
    if (!K[k]) continue;
    if (!g.value(k).allFinite()) throw Error(ErrorKind::input, "lipschitz_extend: undefined value on K");
    good.push_back(k);
  }
  if (good.empty()) throw Error(ErrorKind::precondition, "lipschitz_extend: K is empty");
  const double measured = g.lipschitz_local(4, K);
  if (measured > 1.05 * lip + 1e-300) {
    throw Error(ErrorKind::precondition, "lipschitz_extend: values on K violate the Lipschitz bound");
  }
  const double L = std::max(lip, measured);
  if (used_lip) *used_lip = L;

  GridFunction out(g.center(), g.radius(), g.h(), g.n());
  std::vector<Vec2> pos(good.size());
  for (std::size_t t = 0; t < good.size(); ++t) pos[t] = g.node(good[t]);
  for (int j = 0; j < g.side(); ++j) {
    for (int i = 0; i < g.side(); ++i) {
      if (!g.in_ball(i, j)) continue;
      const std::size_t k = g.index(i, j);
      if (K[k]) {
        out.value(k) = g.value(k);
        continue;
      }
      const Vec2 x = g.node(i, j);
      for (int c = 0; c < g.n(); ++c) {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        for (std::size_t t = 0; t < good.size(); ++t) {
          const double d = L * (x - pos[t]).norm();
          const double v = g.value(good[t])[c];
          lo = std::min(lo, v + d);
          hi = std::max(hi, v - d);
        }
        out.at(i, j, c) = 0.5 * (lo + hi);
      }
    }
  }
  return out;
}

LipApprox approximate(const SampledCurrent& T, const Region& C, const ConstantsConfig& cfg) {
  if (C.kind != Region::Kind::cylinder) throw Error(ErrorKind::input, "approximate: region is not a cylinder");
  const Vec2 q = C.center.head<2>();
  const double r = C.radius;
  const int m = 2;
  LipApprox A;
  A.chart = centred_chart(T, C.frame, q, r);
  const SampledCurrent& X = A.chart;
  const GridFunction& b = X.base;
  const double h = b.h(), h2 = h * h;

  const RegionSamples full = RegionSamples::cylinder(X, q, r);
  A.E = (full.mass() - full.area()) / full.area();
  A.r = r;
  if (A.E > cfg.eps1) throw Error(ErrorKind::precondition, "approximate: excess above eps1");
  const auto in_r = ball_mask(b, q, r);
  std::size_t masked = 0, nodes_r = 0;
  for (std::size_t k = 0; k < b.node_count(); ++k) {
    if (!in_r[k]) continue;
    ++nodes_r;
    masked += X.base_mask[k] == 0;
  }
  if (masked > nodes_r / 20) {
    throw Error(ErrorKind::precondition, "approximate: projection multi-sheeted beyond the defect allowance");
  }

  const double E = std::max(A.E, kExcessFloor);
  const double beta = cfg.trunc_beta;
  A.maximal = maximal_excess(X, Region::cylinder(C.center, r, X.frame));
  A.threshold = std::pow(E, 2 * beta);
  const GoodSet gs = good_set(A.maximal, A.threshold, m);
  const double shrink = r * std::pow(E, (1 - 2 * beta) / m);
  A.s = r - shrink;

  GridFunction g(q, A.s, h, b.n());
  const int shift = b.half() - g.half();
  std::vector<std::uint8_t> K(g.node_count(), 0);
  std::size_t bad_nodes = 0;
  for (int j = 0; j < g.side(); ++j) {
    for (int i = 0; i < g.side(); ++i) {
      const std::size_t kb = b.index(i + shift, j + shift), kg = g.index(i, j);
      g.value(kg) = b.value(kb);
      if (!g.in_ball(i, j)) continue;
      K[kg] = gs.K[kb] && X.base_mask[kb];
      if (!K[kg]) {
        ++bad_nodes;
        g.value(kg).setConstant(kNaN);
      }
    }
  }
  for (std::size_t k = 0; k < g.node_count(); ++k)
    if (!K[k]) g.value(k).setConstant(kNaN);
  A.f = lipschitz_extend(g, K, cfg.lip_constant * std::pow(E, cfg.eta), &A.lip_bound);
  A.K = std::move(K);

  LipStats& st = A.stats;
  st.lip_const = A.f.lipschitz_local(4);
  st.bad_measure = h2 * bad_nodes;
  {
    // B_{s - 2h}: difference stencils of the cut cells stay inside f's ball
    const double se = A.s - 2 * h;
    const RegionSamples cs = RegionSamples::cylinder(X, q, se);
    const auto w = disk_weights(A.f, q, se);
    double dir = 0.0;
    for (int j = 0; j < A.f.side(); ++j)
      for (int i = 0; i < A.f.side(); ++i)
        if (const double wk = w[A.f.index(i, j)]; wk > 0) dir += 0.5 * wk * A.f.jacobian(i, j).squaredNorm();
    st.energy_gap = std::abs(cs.mass() - cs.area() - dir);
  }
  {
    const std::vector<double> dens = excess_density(X);
    double e_L = 0.0;
    for (std::size_t k = 0; k < b.node_count(); ++k)
      if (gs.L[k] && in_r[k]) e_L += h2 * dens[k];
    st.bad_bound = std::pow(5.0, m) / std::pow(E, 2 * beta) * e_L;
    st.bad_bound_coarse = std::pow(5.0, m) * M_PI * std::pow(E, 1 - 2 * beta) * r * r;
  }

  // Slice radius and annulus competitor, reported as diagnostics.
  st.slice_radius = kNaN;
  st.competitor_gap = kNaN;
  const double wt = r * std::pow(E, cfg.theta), wg = r * std::pow(E, cfg.gamma);
  const double s_lo = r * (1 - std::pow(E, cfg.sigma)), s_hi = std::min(r * (1 - std::pow(E, cfg.theta)), A.s - wt);
  if (s_hi > s_lo && s_lo - 2 * wt > 0) {
    const GridFunction& f = A.f;
    std::vector<double> dens(f.node_count(), 0.0);
    for (int j = 0; j < f.side(); ++j)
      for (int i = 0; i < f.side(); ++i)
        if (f.in_ball(i, j)) dens[f.index(i, j)] = f.jacobian(i, j).squaredNorm();
    double best = std::numeric_limits<double>::infinity();
    const int steps = 16;
    for (int t = 0; t <= steps; ++t) {
      const double sc = s_lo + (s_hi - s_lo) * t / steps;
      double ring = 0.0;
      for (std::size_t k = 0; k < f.node_count(); ++k) {
        const double d = (f.node(k) - q).norm();
        if (d <= sc + wt && d > sc - 2 * wt) ring += h2 * dens[k];
      }
      if (ring < best) {
        best = ring;
        st.slice_radius = sc;
      }
    }
    const double sc = st.slice_radius;
    if (wg >= 2 * h && f.radius() - wg >= sc) {
      const GridFunction fm = mollify(f, wg);
      GridFunction gc(q, sc, h, f.n());
      const int sf = f.half() - gc.half(), sm = fm.half() - gc.half();
      for (int j = 0; j < gc.side(); ++j) {
        for (int i = 0; i < gc.side(); ++i) {
          const double d = (gc.node(i, j) - q).norm();
          const Vec hv = f.value(f.index(i + sf, j + sf));
          const Vec mv = fm.value(fm.index(i + sm, j + sm));
          const double lam = std::clamp((d - sc + wt) / wt, 0.0, 1.0);
          gc.value(gc.index(i, j)) = lam * hv + (1 - lam) * mv;
        }
      }
      double eg = 0.0, eh = 0.0;
      for (int j = 0; j < gc.side(); ++j) {
        for (int i = 0; i < gc.side(); ++i) {
          if (!gc.in_ball(i, j)) continue;
          eg += h2 * gc.jacobian(i, j).squaredNorm();
          const std::size_t kb = b.index(i + b.half() - gc.half(), j + b.half() - gc.half());
          if (!gs.L[kb]) eh += h2 * dens[f.index(i + sf, j + sf)];
        }
      }
      st.competitor_gap = eg - eh;
    }
  }
  return A;
}

SliceCheck bv_slice_check(const SampledCurrent& T, const SliceTest& psi, const Vec2& qa, double a) {
  if (psi.lipschitz > 1.0) throw Error(ErrorKind::input, "bv_slice_check: |D psi| must be <= 1");
  if (!psi.psi) throw Error(ErrorKind::input, "bv_slice_check: psi missing");
  const GridFunction& g = T.base;
  if ((qa - g.center()).norm() + a > g.radius() * (1 + 1e-12)) {
    throw Error(ErrorKind::precondition, "bv_slice_check: A leaves the base domain");
  }
  const double h = g.h();
  std::vector<double> phi(g.node_count(), 0.0);
  for (std::size_t k = 0; k < g.node_count(); ++k) {
    const auto v = g.value(k);
    phi[k] = v.allFinite() ? psi.psi(v) : kNaN;
  }
  for (const auto& d : T.defects) {
    const auto [i, j] = g.nearest(d.position.head<2>());
    if (!g.in_lattice(i, j)) continue;
    // Horizontal part of the defect's tangent counts as a partial sheet.
    const double proj = std::abs(d.tangent.leftCols(2).determinant());
    phi[g.index(i, j)] += psi.psi(d.position.tail(g.n())) * d.mass * proj / (h * h);
  }
  const auto inA = ball_mask(g, qa, a);
  double tv = 0.0;
  for (int j = 0; j + 1 < g.side(); ++j) {
    for (int i = 0; i + 1 < g.side(); ++i) {
      const std::size_t k = g.index(i, j), kx = g.index(i + 1, j), ky = g.index(i, j + 1);
      if (!inA[k] || !inA[kx] || !inA[ky]) continue;
      const double dx = phi[kx] - phi[k], dy = phi[ky] - phi[k];
      tv += h * std::sqrt(dx * dx + dy * dy);
    }
  }
  const RegionSamples s = RegionSamples::cylinder(T, qa, a);
  Mat U = Mat::Zero(2, 2 + g.n());
  U(0, 0) = U(1, 1) = 1.0;
  SliceCheck out;
  out.lhs = tv * tv;
  out.rhs = 2.0 * s.excess_measure(U) * s.mass();
  return out;
}

}  // namespace cman
