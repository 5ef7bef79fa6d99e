#include "cman/certification.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <limits>
#include <numbers>
#include <random>

#include "cman/lipschitz.hpp"

namespace cman {
namespace {

constexpr double kBinom4[5][5] = {
    {1, 0, 0, 0, 0}, {1, 1, 0, 0, 0}, {1, 2, 1, 0, 0}, {1, 3, 3, 1, 0}, {1, 4, 6, 4, 1}};

// Tensor norm of the order-l part of the difference of two planar jets.
double jet_diff_norm(const double* a, const double* b, int l) {
  double s = 0.0;
  for (int k = 0; k <= l; ++k) {
    const double d = a[jet_index(l - k, k)] - b[jet_index(l - k, k)];
    s += kBinom4[l][k] * d * d;
  }
  return std::sqrt(s);
}

double jet_norm(const double* a, int l) {
  static const double zero[15] = {};
  return jet_diff_norm(a, zero, l);
}

double jet_scale(const double* sup, double rho) {
  double F = 0.0;
  for (int l = 0; l <= 4; ++l) F += std::pow(rho, l) * sup[l];
  return F;
}

void apply_floor(DerivativeRow& row, double F, double rho) {
  row.floor = kRoundoff * F / std::pow(rho, row.order);
  if (row.diff <= row.floor) row.diff = 0.0;
}

// Node of g at x when x is (up to rounding) on g's lattice.
bool lattice_node(const GridFunction& g, const Vec2& x, int& i, int& j) {
  const auto ij = g.nearest(x);
  i = ij[0];
  j = ij[1];
  return g.in_lattice(i, j) && (g.node(i, j) - x).norm() <= 1e-9 * g.h();
}

// Disk weights on B_r(c), dropping cut cells whose node lies outside the disk
// and outside f's defined samples.
std::vector<double> defined_disk_weights(const GridFunction& f, const Vec2& c, double r) {
  auto w = disk_weights(f, c, r);
  for (std::size_t k = 0; k < w.size(); ++k) {
    if (w[k] > 0 && !f.value(k).allFinite()) {
      if ((f.node(k) - c).norm() <= r) throw Error(ErrorKind::precondition, "undefined samples inside the disk");
      w[k] = 0.0;
    }
  }
  return w;
}

std::vector<Vec2> disk_lattice(const Vec2& c, double r, int per_side) {
  std::vector<Vec2> pts;
  for (int j = 0; j < per_side; ++j) {
    for (int i = 0; i < per_side; ++i) {
      const Vec2 x = c + r * Vec2(2.0 * i / (per_side - 1) - 1.0, 2.0 * j / (per_side - 1) - 1.0);
      if ((x - c).norm() <= r) pts.push_back(x);
    }
  }
  return pts;
}

}  // namespace

CheckRecord make_check(std::string name, double lhs, double rhs, double slack, std::string_view inputs) {
  CheckRecord r;
  r.name = std::move(name);
  r.lhs = lhs;
  r.rhs = rhs;
  r.slack = slack;
  if (rhs > 0) {
    r.ratio = lhs / rhs;
  } else {
    r.ratio = lhs > 0 ? std::numeric_limits<double>::infinity() : 0.0;
  }
  r.pass = r.ratio <= 1.0 + slack;
  r.inputs_hash = hash_inputs(inputs);
  return r;
}

bool CertReport::all_pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckRecord& c) { return c.pass; });
}

std::string hash_inputs(std::string_view text) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

L1Check l1_distance_check(const GridFunction& f, const GridFunction& f_bar, const Vec2& q, double rho,
                          double alpha, int m) {
  if (std::abs(f.h() - f_bar.h()) > 1e-12 * f.h() || f.n() != f_bar.n()) {
    throw Error(ErrorKind::input, "l1_distance_check: domain mismatch (lattices differ)");
  }
  const double R = 4 * rho;
  if ((q - f_bar.center()).norm() + R > f_bar.radius() * (1 + 1e-12)) {
    throw Error(ErrorKind::input, "l1_distance_check: domain mismatch (B_4rho not inside f_bar's ball)");
  }
  const auto w = disk_weights(f_bar, q, R);
  L1Check out;
  double mass = 0.0;
  for (int j = 0; j < f_bar.side(); ++j) {
    for (int i = 0; i < f_bar.side(); ++i) {
      const double wi = w[f_bar.index(i, j)];
      if (wi <= 0) continue;
      int a, b;
      if (!lattice_node(f, f_bar.node(i, j), a, b)) {
        throw Error(ErrorKind::input, "l1_distance_check: domain mismatch (lattices not aligned)");
      }
      const auto u = f.value(f.index(a, b));
      const auto v = f_bar.value(f_bar.index(i, j));
      if (!u.allFinite() || !v.allFinite()) {
        // cut cells centred just outside the disk carry weight but no extension value
        if ((f_bar.node(i, j) - q).norm() > R) continue;
        throw Error(ErrorKind::input, "l1_distance_check: domain mismatch (undefined samples in B_4rho)");
      }
      out.lhs += wi * (u - v).norm();
      mass += wi * v.norm();
    }
  }
  if (out.lhs <= kRoundoff * mass) out.lhs = 0.0;
  out.budget = std::pow(rho, m + 3 + alpha);
  out.constant = out.lhs / out.budget;
  return out;
}

ScaleComparison scale_comparison(const SampledCurrent& T, const Vec& p, double r, const Frame& pi,
                                 const ConstantsConfig& cfg) {
  InterpolateOptions opts;
  opts.keep_stages = false;
  const Interpolant I1 = interpolate(T, p, r, pi, cfg, opts);
  const Interpolant I2 = interpolate(T, p, 2 * r, pi, cfg, opts);
  const Vec2 q = pi.to_frame(p).head<2>();
  ScaleComparison out;
  out.rows.resize(5);
  double a[15], b[15];
  double sup[5] = {0, 0, 0, 0, 0};
  for (const Vec2& x : disk_lattice(q, 1.5 * r, 25)) {
    for (int c = 0; c < I1.f_bar_model.n(); ++c) {
      for (int l = 0; l <= 4; ++l) {
        for (int k = 0; k <= l; ++k) {
          a[jet_index(l - k, k)] = I1.f_bar_model.partial(x, c, l - k, k);
          b[jet_index(l - k, k)] = I2.f_bar_model.partial(x, c, l - k, k);
        }
      }
      for (int l = 0; l <= 4; ++l) {
        out.rows[l].diff = std::max(out.rows[l].diff, jet_diff_norm(a, b, l));
        sup[l] = std::max({sup[l], jet_norm(a, l), jet_norm(b, l)});
      }
    }
  }
  const double F = jet_scale(sup, r);
  for (int l = 0; l <= 4; ++l) {
    out.rows[l].order = l;
    apply_floor(out.rows[l], F, r);
    out.rows[l].normalized = out.rows[l].diff / std::pow(r, 3 + cfg.alpha - l);
    out.constant = std::max(out.constant, out.rows[l].normalized);
  }
  return out;
}

std::string to_string(ComparisonMode mode) {
  switch (mode) {
    case ComparisonMode::cross_plane: return "cross_plane";
    case ComparisonMode::cross_center: return "cross_center";
    case ComparisonMode::cross_scale: return "cross_scale";
  }
  return "?";
}

InterpolantComparison interpolant_comparison(const Interpolant& g1, const Interpolant& g2, ComparisonMode mode,
                                             double alpha) {
  if (g1.n() != g2.n()) throw Error(ErrorKind::input, "interpolant_comparison: codimension mismatch");
  const Interpolant& small = g1.rho <= g2.rho ? g1 : g2;
  const Interpolant& other = g1.rho <= g2.rho ? g2 : g1;
  InterpolantComparison out;
  out.mode = mode;
  out.rho = small.rho;
  const int lo = mode == ComparisonMode::cross_center ? 1 : 0;
  const int hi = lo + 3;
  for (int l = lo; l <= hi; ++l) out.rows.push_back({l, 0.0, 0.0, 0.0});

  std::size_t used = 0;
  double a[15], b[15];
  double sup[5] = {0, 0, 0, 0, 0};
  for (const Vec2& x : disk_lattice(small.center, small.rho, 33)) {
    if ((x - other.center).norm() > other.rho) continue;
    ++used;
    for (int c = 0; c < small.n(); ++c) {
      small.model.planar_jet(x, c, 4, a);
      other.model.planar_jet(x, c, 4, b);
      for (auto& row : out.rows) row.diff = std::max(row.diff, jet_diff_norm(a, b, row.order));
      for (int l = 0; l <= 4; ++l) sup[l] = std::max({sup[l], jet_norm(a, l), jet_norm(b, l)});
    }
  }
  if (used == 0) throw Error(ErrorKind::precondition, "interpolant_comparison: empty overlap");
  const double F = jet_scale(sup, out.rho);
  for (auto& row : out.rows) {
    apply_floor(row, F, out.rho);
    row.normalized = row.diff / std::pow(out.rho, 3 + alpha - row.order);
    out.constant = std::max(out.constant, row.normalized);
  }
  if (mode == ComparisonMode::cross_scale) {
    out.N = static_cast<int>(std::lround(std::log2(other.rho / small.rho)));
    for (int c = 0; c < small.n(); ++c) {
      small.model.planar_jet(small.center, c, 4, a);
      other.model.planar_jet(small.center, c, 4, b);
      out.center_d3 = std::max(out.center_d3, jet_diff_norm(a, b, 3));
    }
    if (out.center_d3 <= kRoundoff * F / std::pow(out.rho, 3)) out.center_d3 = 0.0;
    out.center_d3_normalized = out.center_d3 / std::pow(std::ldexp(small.rho, out.N), alpha);
  }
  return out;
}

HolderResult holder_seminorm(const GridFunction& field, double alpha, std::uint64_t seed, std::size_t pairs) {
  std::vector<std::size_t> nodes;
  for (std::size_t k = 0; k < field.node_count(); ++k)
    if (field.value(k).allFinite()) nodes.push_back(k);
  if (nodes.size() < 2) throw Error(ErrorKind::precondition, "holder_seminorm: too few samples");
  std::mt19937_64 rng(seed);
  HolderResult out;
  const double min_sep = 2 * field.h();
  const std::size_t max_attempts = 20 * pairs;
  for (std::size_t t = 0; t < max_attempts && out.pairs < pairs; ++t) {
    const std::size_t a = nodes[rng() % nodes.size()];
    const std::size_t b = nodes[rng() % nodes.size()];
    const double d = (field.node(a) - field.node(b)).norm();
    if (d < min_sep) continue;
    ++out.pairs;
    const double v = (field.value(a) - field.value(b)).norm() / std::pow(d, alpha);
    if (v > out.seminorm) {
      out.seminorm = v;
      out.best_separation = d;
    }
  }
  if (out.pairs == 0) throw Error(ErrorKind::precondition, "holder_seminorm: too few samples (no pair at distance >= 2h)");
  return out;
}

GridFunction third_derivative_field(const BlendedSurface& H, int component) {
  const GridFunction& J = H.jet;
  GridFunction F(J.center(), J.radius(), J.h(), 4);
  for (std::size_t k = 0; k < J.node_count(); ++k) {
    for (int b = 0; b <= 3; ++b) {
      F.raw()[k * 4 + b] = std::sqrt(kBinom4[3][b]) * J.raw()[k * J.n() + component * jet_size(4) + jet_index(3 - b, b)];
    }
  }
  return F;
}

DecayFit decay_fit(std::vector<double> radii, std::vector<double> excess) {
  if (radii.size() != excess.size()) throw Error(ErrorKind::input, "decay_fit: radii and excess lengths differ");
  if (radii.size() < 4) throw Error(ErrorKind::input, "decay_fit: need at least 4 radii");
  for (double e : excess) {
    if (!(e > 1e-14)) throw Error(ErrorKind::precondition, "decay_fit: excess <= 1e-14 (flat input, slope undefined)");
  }
  const std::size_t n = radii.size();
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sx += std::log(radii[i]);
    sy += std::log(excess[i]);
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = std::log(radii[i]) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(excess[i]) - my);
  }
  DecayFit out;
  out.slope = sxy / sxx;
  out.intercept = my - out.slope * mx;
  double rr = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = std::log(excess[i]) - (out.intercept + out.slope * std::log(radii[i]));
    rr += e * e;
  }
  out.residual = std::sqrt(rr / n);
  out.radii = std::move(radii);
  out.excess = std::move(excess);
  return out;
}

DecayFit decay_fit(const SampledCurrent& T, const Vec& p, const std::vector<double>& radii) {
  std::vector<double> ex;
  for (double r : radii) ex.push_back(spherical_excess(T, Region::ball(p, r)).value);
  return decay_fit(radii, ex);
}

BasicDecay basic_decay_ratio(double e_half, double e_one, int m, double theta) {
  if (!(e_one > 1e-14)) throw Error(ErrorKind::precondition, "basic_decay_check: flat input, e(T, B_1) ~ 0");
  BasicDecay out;
  out.e_half = e_half;
  out.e_one = e_one;
  out.ratio = e_half / e_one;
  out.threshold = std::ldexp(1.0, -(m + 2)) + theta;
  return out;
}

BasicDecay basic_decay_check(const SampledCurrent& T, const ConstantsConfig& cfg) {
  const Vec2 o = Vec2::Zero();
  const RegionSamples one = RegionSamples::cylinder(T, o, 1.0);
  const RegionSamples half = RegionSamples::cylinder(T, o, 0.5);
  const Mat L = one.mean_jacobian();
  return basic_decay_ratio(half.excess_measure_tilt(L), one.excess_measure_tilt(L), T.m(), cfg.decay_theta);
}

TiltIdentity tilt_excess_identity(const GridFunction& f, double t, double s, double eta) {
  if (!(0 < t && t <= s && s <= f.radius() * (1 + 1e-12))) {
    throw Error(ErrorKind::input, "tilt_excess_identity: need 0 < t <= s <= radius");
  }
  SampledCurrent T;
  T.frame = Frame::identity(2, f.n());
  T.base = f;
  T.refresh_mask();
  const Vec2 c = f.center();
  const RegionSamples Bs = RegionSamples::cylinder(T, c, s);
  const RegionSamples Bt = RegionSamples::cylinder(T, c, t);
  const int n = f.n();

  auto mean_and_sup = [n](const RegionSamples& R, Mat& mean, double& sup) {
    mean = Mat::Zero(n, 2);
    sup = 0.0;
    const auto w = R.weights();
    const auto J = R.jacobians();
    for (std::size_t k = 0; k < R.size(); ++k) {
      const Eigen::Map<const Mat> D(J.data() + 2 * n * k, n, 2);
      mean += w[k] * D;
      sup = std::max(sup, D.norm());
    }
    mean /= R.area();
  };
  TiltIdentity out;
  double sup;
  mean_and_sup(Bs, out.A, sup);
  if (out.A.norm() > 0.5 || sup > 1.0) {
    throw Error(ErrorKind::precondition, "tilt_excess_identity: gradient too large for the Taylor expansion");
  }
  out.lhs = Bt.excess_measure_tilt(out.A);
  {
    const auto w = Bt.weights();
    const auto J = Bt.jacobians();
    for (std::size_t k = 0; k < Bt.size(); ++k) {
      const Eigen::Map<const Mat> D(J.data() + 2 * n * k, n, 2);
      out.rhs += w[k] * (D - out.A).squaredNorm() / 2;
    }
  }
  out.gap = std::abs(out.lhs - out.rhs);
  out.E = Bs.excess_measure_tilt(out.A) / Bs.area();
  out.constant = out.E > 0 ? out.gap / std::pow(out.E, 1 + eta) : 0.0;
  return out;
}

HarmonicLimit harmonic_limit_check(const std::vector<SampledCurrent>& family, const ConstantsConfig& cfg) {
  if (family.size() < 3) throw Error(ErrorKind::input, "harmonic_limit_check: need at least 3 amplitudes");
  HarmonicLimit out;
  out.energy_bound = 2 * std::numbers::pi * 1.05;
  constexpr int kDeg = 4;
  for (const SampledCurrent& T : family) {
    Vec o = Vec::Zero(2);
    const LipApprox A = approximate(T, Region::cylinder(o, 1.0, T.frame), cfg);
    if (!(A.E >= 1e-14)) throw Error(ErrorKind::precondition, "harmonic_limit_check: E below 1e-14 (flat input)");
    const GridFunction& f = A.f;
    const Vec2 c = f.center();
    const double scale = 1.0 / std::sqrt(A.E);

    // Mean of f over B_s.
    const auto ws = defined_disk_weights(f, c, A.s);
    double mass = 0.0, mean = 0.0, energy = 0.0;
    for (std::size_t k = 0; k < ws.size(); ++k) {
      if (ws[k] <= 0) continue;
      const int i = static_cast<int>(k % f.side()), j = static_cast<int>(k / f.side());
      mass += ws[k];
      mean += ws[k] * f.at(i, j, 0);
      energy += ws[k] * f.jacobian(i, j).row(0).squaredNorm() * scale * scale;
    }
    mean /= mass;

    // W^{1,2}(B_{1/2}) least squares over Re/Im z^k, k <= 4.
    const auto wh = defined_disk_weights(f, c, 0.5);
    std::vector<std::size_t> nodes;
    for (std::size_t k = 0; k < wh.size(); ++k)
      if (wh[k] > 0) nodes.push_back(k);
    const int nb = 2 * kDeg + 1;
    Mat M(3 * nodes.size(), nb);
    Vec rhs(3 * nodes.size());
    for (std::size_t r = 0; r < nodes.size(); ++r) {
      const std::size_t k = nodes[r];
      const int i = static_cast<int>(k % f.side()), j = static_cast<int>(k / f.side());
      const double sw = std::sqrt(wh[k]);
      const Vec2 x = f.node(i, j) - c;
      const std::complex<double> z(x.x(), x.y());
      std::complex<double> zk(1, 0), dzk(0, 0);
      for (int d = 0; d <= kDeg; ++d) {
        if (d > 0) {
          dzk = double(d) * zk;
          zk *= z;
        }
        // Re z^d: (Re, Re dz, -Im dz); Im z^d: (Im, Im dz, Re dz).
        const int cr = d == 0 ? 0 : 2 * d - 1;
        M(3 * r, cr) = sw * zk.real();
        M(3 * r + 1, cr) = sw * dzk.real();
        M(3 * r + 2, cr) = -sw * dzk.imag();
        if (d > 0) {
          M(3 * r, 2 * d) = sw * zk.imag();
          M(3 * r + 1, 2 * d) = sw * dzk.imag();
          M(3 * r + 2, 2 * d) = sw * dzk.real();
        }
      }
      const Mat D = f.jacobian(i, j);
      rhs(3 * r) = sw * (f.at(i, j, 0) - mean) * scale;
      rhs(3 * r + 1) = sw * D(0, 0) * scale;
      rhs(3 * r + 2) = sw * D(0, 1) * scale;
    }
    const Vec coef = M.colPivHouseholderQr().solve(rhs);
    out.E.push_back(A.E);
    const double dist = (M * coef - rhs).norm();
    out.distance.push_back(dist <= kRoundoff * rhs.norm() ? 0.0 : dist);
    out.energy.push_back(energy);
  }
  out.nonincreasing = true;
  for (std::size_t l = 1; l < out.distance.size(); ++l) {
    if (out.distance[l] > out.distance[l - 1] * (1 + 1e-9) + 1e-12) out.nonincreasing = false;
  }
  out.halved = out.distance.back() <= 0.5 * out.distance.front();
  out.pass = out.nonincreasing && out.halved && out.energy.back() <= out.energy_bound;
  return out;
}

}  // namespace cman
