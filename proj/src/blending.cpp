#include "cman/blending.hpp"

#include <algorithm>
#include <cmath>

namespace cman {
namespace {

Taylor4 mul(const Taylor4& a, const Taylor4& b) {
  Taylor4 r;
  for (int n = 0; n < 5; ++n)
    for (int k = 0; k <= n; ++k) r.c[n] += a.c[k] * b.c[n - k];
  return r;
}

Taylor4 recip(const Taylor4& v) {
  Taylor4 r;
  r.c[0] = 1.0 / v.c[0];
  for (int n = 1; n < 5; ++n) {
    double s = 0.0;
    for (int k = 1; k <= n; ++k) s += v.c[k] * r.c[n - k];
    r.c[n] = -s / v.c[0];
  }
  return r;
}

Taylor4 exp_series(const Taylor4& g) {
  Taylor4 e;
  e.c[0] = std::exp(g.c[0]);
  for (int n = 1; n < 5; ++n) {
    double s = 0.0;
    for (int k = 1; k <= n; ++k) s += k * g.c[k] * e.c[n - k];
    e.c[n] = s / n;
  }
  return e;
}

// exp(-1/(1 - (t/w)^2)) expanded at t.
Taylor4 bump_series(double t, double w) {
  Taylor4 zero;
  const double u0 = t / w;
  const double v0 = 1.0 - u0 * u0;
  if (v0 <= 0.0 || -1.0 / v0 < -700.0) return zero;
  Taylor4 u;
  u.c[0] = u0;
  u.c[1] = 1.0 / w;
  Taylor4 v = mul(u, u);
  for (double& c : v.c) c = -c;
  v.c[0] += 1.0;
  Taylor4 g = recip(v);
  for (double& c : g.c) c = -c;
  return exp_series(g);
}

constexpr double kFact[5] = {1, 1, 2, 6, 24};

double binom(int n, int k) { return kFact[n] / (kFact[k] * kFact[n - k]); }

// Partials of h at q up to `order` (n x jet_size(order), column per slot).
void assemble(const PartitionOfUnity& pou, const std::vector<std::shared_ptr<const Interpolant>>& g,
              const Vec2& q, int order, int n, Mat& out) {
  const DyadicGrid& grid = pou.grid();
  const int i = grid.nearest(Vec(q));
  if (i < 0) throw Error(ErrorKind::precondition, "blend: point outside the cube list");
  const int sz = jet_size(order);
  out = Mat::Zero(n, sz);
  double psi[15], gj[15], gi[15];
  const auto& self = g[i];
  if (!self) throw Error(ErrorKind::precondition, "blend: missing interpolant for an active cube");
  for (int j : grid.adjacency[i]) {
    pou.jet(j, q, psi);
    bool active = false;
    for (int t = 0; t < jet_size(4); ++t) active |= psi[t] != 0.0;
    if (!active) continue;
    if (!g[j]) throw Error(ErrorKind::precondition, "blend: missing interpolant for an active cube");
    for (int c = 0; c < n; ++c) {
      g[j]->model.planar_jet(q, c, order, gj);
      self->model.planar_jet(q, c, order, gi);
      for (int l = 0; l <= order; ++l) {
        for (int b = 0; b <= l; ++b) {
          const int a = l - b;
          // psi_j D^alpha g_j + sum_{0 < beta <= alpha} C D^beta psi_j D^{alpha-beta}(g_j - g_i);
          // the g_i part vanishes after summing over j since sum_j D^beta psi_j = 0.
          double s = psi[0] * gj[jet_index(a, b)];
          for (int a1 = 0; a1 <= a; ++a1) {
            for (int b1 = 0; b1 <= b; ++b1) {
              if (a1 + b1 == 0) continue;
              const int slot = jet_index(a - a1, b - b1);
              s += binom(a, a1) * binom(b, b1) * psi[jet_index(a1, b1)] * (gj[slot] - gi[slot]);
            }
          }
          out(c, jet_index(a, b)) += s;
        }
      }
    }
  }
}

}  // namespace

int DyadicGrid::find(const std::vector<int>& i) const {
  int pos = 0, stride = 1;
  for (int j = m - 1; j >= 0; --j) {
    if (std::abs(i[j]) > reach) return -1;
    pos += (i[j] + reach) * stride;
    stride *= 2 * reach + 1;
  }
  return pos;
}

int DyadicGrid::nearest(const Vec& q) const {
  std::vector<int> i(m);
  for (int j = 0; j < m; ++j) i[j] = static_cast<int>(std::floor(q[j] / spacing + 0.5));
  return find(i);
}

DyadicGrid dyadic_grid(int k, int n0, int m) {
  if (!(5 < n0 && n0 < k)) throw Error(ErrorKind::input, "dyadic_grid: need 5 < n0 < k");
  if (m < 1 || m > 4) throw Error(ErrorKind::input, "dyadic_grid: m out of range");
  DyadicGrid G;
  G.m = m;
  G.k = k;
  G.n0 = n0;
  G.spacing = std::ldexp(1.0, -k);
  G.half_side = std::ldexp(1.0, -n0);
  // c_i's cube [c_i - 2^{-k}, c_i + 2^{-k}] meets Q iff |i_j| <= 2^{k-n0} + 1.
  G.reach = (1 << (k - n0)) + 1;
  const int side = 2 * G.reach + 1;
  int total = 1;
  for (int j = 0; j < m; ++j) total *= side;
  G.index.resize(total);
  G.centers.resize(total);
  // Ordering matches find(): the last coordinate varies fastest.
  for (int pos = 0; pos < total; ++pos) {
    std::vector<int> i(m);
    int r = pos;
    for (int j = m - 1; j >= 0; --j) {
      i[j] = r % side - G.reach;
      r /= side;
    }
    G.index[pos] = i;
    Vec c(m);
    for (int j = 0; j < m; ++j) c[j] = i[j] * G.spacing;
    G.centers[pos] = c;
  }
  G.adjacency.resize(total);
  for (int pos = 0; pos < total; ++pos) {
    std::vector<int> off(m, -1);
    while (true) {
      std::vector<int> j = G.index[pos];
      for (int t = 0; t < m; ++t) j[t] += off[t];
      if (const int f = G.find(j); f >= 0) G.adjacency[pos].push_back(f);
      int t = m - 1;
      while (t >= 0 && off[t] == 1) off[t--] = -1;
      if (t < 0) break;
      ++off[t];
    }
  }
  return G;
}

PartitionOfUnity::PartitionOfUnity(DyadicGrid grid, double width) : grid_(std::move(grid)), width_(width) {
  if (!(width_ > 0.5) || width_ > 1.25) throw Error(ErrorKind::input, "PartitionOfUnity: width must lie in (1/2, 5/4]");
  // Denominator sum_j b(t - j) is 1-periodic; its minimum sits at t = 1/2.
  for (int s = 0; s <= 200; ++s) {
    const double t = s / 200.0;
    double den = 0.0;
    for (int j = -2; j <= 2; ++j) den += bump_series(t - j, width_).c[0];
    if (den < 1e-6) throw Error(ErrorKind::precondition, "bump_partition: profile too narrow, denominator below 1e-6");
  }
}

std::array<double, 5> PartitionOfUnity::profile(double t) const {
  const Taylor4 b = bump_series(t, width_);
  std::array<double, 5> out{};
  if (b.c[0] == 0.0 && b.c[1] == 0.0) return out;
  Taylor4 S;
  const int lo = static_cast<int>(std::floor(t - width_)) , hi = static_cast<int>(std::ceil(t + width_));
  for (int j = lo; j <= hi; ++j) {
    const Taylor4 bj = bump_series(t - j, width_);
    for (int c = 0; c < 5; ++c) S.c[c] += bj.c[c];
  }
  const Taylor4 beta = mul(b, recip(S));
  for (int c = 0; c < 5; ++c) out[c] = beta.c[c] * kFact[c];
  return out;
}

double PartitionOfUnity::psi(int cube, const Vec& q) const {
  double v = 1.0;
  for (int j = 0; j < grid_.m; ++j) {
    v *= profile((q[j] - grid_.centers[cube][j]) / grid_.spacing)[0];
    if (v == 0.0) break;
  }
  return v;
}

void PartitionOfUnity::jet(int cube, const Vec2& q, double* out, bool physical) const {
  const Vec& c = grid_.centers[cube];
  const auto bx = profile((q.x() - c[0]) / grid_.spacing);
  const auto by = profile((q.y() - c[1]) / grid_.spacing);
  const double inv = 1.0 / grid_.spacing;
  for (int l = 0; l <= 4; ++l) {
    const double sc = physical ? std::pow(inv, l) : 1.0;
    for (int b = 0; b <= l; ++b) out[jet_index(l - b, b)] = sc * bx[l - b] * by[b];
  }
}

std::array<double, 5> PartitionOfUnity::profile_sup_norms() const {
  std::array<double, 5> best{};
  const int N = static_cast<int>(std::ceil(400 * width_));
  std::vector<std::array<double, 5>> prof(2 * N + 1);
  for (int s = -N; s <= N; ++s) prof[s + N] = profile(s / 400.0);
  for (int y = 0; y <= 2 * N; ++y) {
    for (int x = 0; x <= 2 * N; ++x) {
      for (int l = 0; l <= 4; ++l) {
        double s = 0.0;
        for (int b = 0; b <= l; ++b) {
          const double d = prof[x][l - b] * prof[y][b];
          s += binom(l, b) * d * d;
        }
        best[l] = std::max(best[l], std::sqrt(s));
      }
    }
  }
  return best;
}

PartitionOfUnity bump_partition(const DyadicGrid& grid) { return PartitionOfUnity(grid); }

BlendedSurface blend(std::vector<std::shared_ptr<const Interpolant>> interpolants, const PartitionOfUnity& pou,
                     int samples_per_half_side) {
  const DyadicGrid& grid = pou.grid();
  if (grid.m != 2) throw Error(ErrorKind::input, "blend: planar cube lists only");
  if (interpolants.size() != grid.size()) throw Error(ErrorKind::input, "blend: one interpolant slot per cube required");
  int n = 0;
  for (const auto& g : interpolants)
    if (g) n = g->n();
  if (n == 0) throw Error(ErrorKind::precondition, "blend: no interpolants");
  BlendedSurface H;
  H.k = grid.k;
  H.pou = pou;
  H.interpolants = std::move(interpolants);
  const double hh = grid.half_side / samples_per_half_side;
  H.h = GridFunction(Vec2::Zero(), grid.half_side, hh, n);
  H.jet = GridFunction(Vec2::Zero(), grid.half_side, hh, n * jet_size(4));
  Mat J;
  for (int j = 0; j < H.h.side(); ++j) {
    for (int i = 0; i < H.h.side(); ++i) {
      const Vec2 q = H.h.node(i, j);
      assemble(H.pou, H.interpolants, q, 4, n, J);
      for (int c = 0; c < n; ++c) {
        H.h.at(i, j, c) = J(c, 0);
        for (int t = 0; t < jet_size(4); ++t) H.jet.at(i, j, c * jet_size(4) + t) = J(c, t);
      }
    }
  }
  return H;
}

Mat derivatives_at(const BlendedSurface& H, const Vec2& q, int order) {
  const double R = H.pou.grid().half_side;
  if (std::abs(q.x()) > R * (1 + 1e-12) || std::abs(q.y()) > R * (1 + 1e-12)) {
    throw Error(ErrorKind::precondition, "derivatives_at: point outside Q");
  }
  if (order < 0 || order > 4) throw Error(ErrorKind::input, "derivatives_at: order must be in 0..4");
  Mat J;
  assemble(H.pou, H.interpolants, q, order, H.h.n(), J);
  return J;
}

double planar_tensor_norm(const double* jet, int order) {
  double s = 0.0;
  for (int b = 0; b <= order; ++b) {
    const double d = jet[jet_index(order - b, b)];
    s += binom(order, b) * d * d;
  }
  return std::sqrt(s);
}

}  // namespace cman
