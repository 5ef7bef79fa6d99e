#include "cman/excess.hpp"

#include <algorithm>
#include <cmath>

namespace cman {
namespace {

double area_element(const Mat& D) {
  if (D.cols() == 2) {
    const Eigen::Matrix2d G = Eigen::Matrix2d::Identity() + D.transpose() * D;
    return std::sqrt(G.determinant());
  }
  const Mat G = Mat::Identity(D.cols(), D.cols()) + D.transpose() * D;
  return std::sqrt(G.determinant());
}

void require_inside(const GridFunction& g, const Vec2& q, double r, const char* what) {
  if ((q - g.center()).norm() + r > g.radius() * (1.0 + 1e-12)) {
    throw Error(ErrorKind::precondition, std::string(what) + " exits the sampled domain");
  }
}

}  // namespace

void RegionSamples::add_node(const GridFunction& g, int i, int j, double w) {
  const Mat D = g.jacobian(i, j);
  if (!D.allFinite()) throw Error(ErrorKind::precondition, "region touches undefined samples");
  w_.push_back(w);
  for (int c = 0; c < D.cols(); ++c)
    for (int r = 0; r < D.rows(); ++r) jac_.push_back(D(r, c));
  area_el_.push_back(area_element(D));
  idx_.push_back(g.index(i, j));
}

RegionSamples RegionSamples::cylinder(const SampledCurrent& T, const Vec2& q, double r) {
  const GridFunction& g = T.base;
  require_inside(g, q, r, "cylinder");
  RegionSamples s;
  s.n_ = g.n();
  const auto w = disk_weights(g, q, r);
  for (int j = 0; j < g.side(); ++j)
    for (int i = 0; i < g.side(); ++i)
      if (const double wi = w[g.index(i, j)]; wi > 0) s.add_node(g, i, j, wi);
  for (const auto& d : T.defects)
    if ((d.position.head<2>() - q).norm() < r) s.defects_.push_back(d);
  return s;
}

RegionSamples RegionSamples::ball(const SampledCurrent& T, const Vec& p, double r) {
  const GridFunction& g = T.base;
  const Vec2 q = p.head<2>();
  const Vec u = p.tail(g.n());
  require_inside(g, q, r, "ball");
  RegionSamples s;
  s.n_ = g.n();
  // Cut cells use the first-order Taylor expansion of f at their node for
  // the sub-sample levels; the level is 2-Lipschitz for |Df| <= 1.
  const double h = g.h();
  const double band = std::sqrt(2.0) * h;
  constexpr int S = 16;
  for (int j = 0; j < g.side(); ++j) {
    for (int i = 0; i < g.side(); ++i) {
      const Vec2 x = g.node(i, j);
      const double dq = (x - q).norm();
      if (dq - r >= band) continue;
      const auto val = g.value(g.index(i, j));
      if (!std::isfinite(val[0])) continue;
      const double l = std::sqrt(dq * dq + (val - u).squaredNorm()) - r;
      if (l <= -band) {
        s.add_node(g, i, j, h * h);
      } else if (l < band) {
        const Mat J = g.jacobian(i, j);
        if (!std::isfinite(J.sum())) continue;
        int inside = 0;
        for (int b = 0; b < S; ++b) {
          for (int a = 0; a < S; ++a) {
            const Vec2 d = h * Vec2((a + 0.5) / S - 0.5, (b + 0.5) / S - 0.5);
            const double z2 = (x + d - q).squaredNorm() + (val + J * d - u).squaredNorm();
            if (z2 < r * r) ++inside;
          }
        }
        if (inside > 0) s.add_node(g, i, j, h * h * inside / double(S * S));
      }
    }
  }
  for (const auto& d : T.defects)
    if ((d.position - p).norm() < r) s.defects_.push_back(d);
  return s;
}

RegionSamples RegionSamples::nodes(const SampledCurrent& T, std::span<const std::uint8_t> select) {
  const GridFunction& g = T.base;
  RegionSamples s;
  s.n_ = g.n();
  const double h2 = g.h() * g.h();
  for (int j = 0; j < g.side(); ++j)
    for (int i = 0; i < g.side(); ++i)
      if (select[g.index(i, j)]) s.add_node(g, i, j, h2);
  for (const auto& d : T.defects) {
    const auto [i, j] = g.nearest(d.position.head<2>());
    if (g.in_lattice(i, j) && select[g.index(i, j)]) s.defects_.push_back(d);
  }
  return s;
}

double RegionSamples::area() const {
  double a = 0.0;
  for (double w : w_) a += w;
  return a;
}

double RegionSamples::mass() const {
  double a = 0.0;
  for (std::size_t k = 0; k < w_.size(); ++k) a += w_[k] * area_el_[k];
  for (const auto& d : defects_) a += d.mass;
  return a;
}

double RegionSamples::excess_measure(const Mat& U) const {
  const int n = n_;
  double e = 0.0;
  Mat D(n, 2);
  for (std::size_t k = 0; k < w_.size(); ++k) {
    D = Eigen::Map<const Mat>(jac_.data() + k * 2 * n, n, 2);
    // 1/2 |T - tau|^2 J = J - <v_1 ^ v_2, tau> for unnormalised graph vectors.
    e += w_[k] * (area_el_[k] - mvector_inner(graph_tangent_rows(D), U));
  }
  for (const auto& d : defects_) e += d.mass * (1.0 - mvector_inner(d.tangent, U));
  return e;
}

double RegionSamples::excess_measure_tilt(const Mat& L) const {
  const int n = n_;
  const double JL = area_element(L);
  double e = 0.0;
  if (n == 1) {
    const double l0 = L(0, 0), l1 = L(0, 1);
    for (std::size_t k = 0; k < w_.size(); ++k) {
      const double d0 = jac_[2 * k], d1 = jac_[2 * k + 1];
      // det(I + D^T L) = 1 + D.L for rank-one D, L.
      e += w_[k] * (area_el_[k] - (1.0 + d0 * l0 + d1 * l1) / JL);
    }
  } else {
    Mat D(n, 2);
    for (std::size_t k = 0; k < w_.size(); ++k) {
      D = Eigen::Map<const Mat>(jac_.data() + k * 2 * n, n, 2);
      const Mat G = Mat::Identity(2, 2) + D.transpose() * L;
      e += w_[k] * (area_el_[k] - G.determinant() / JL);
    }
  }
  if (!defects_.empty()) {
    const Mat U = orthonormalize_rows(graph_tangent_rows(L));
    for (const auto& d : defects_) e += d.mass * (1.0 - mvector_inner(d.tangent, U));
  }
  return e;
}

Mat RegionSamples::mean_jacobian() const {
  Mat acc = Mat::Zero(n_, 2);
  double tot = 0.0;
  for (std::size_t k = 0; k < w_.size(); ++k) {
    const double wk = w_[k] * area_el_[k];
    acc += wk * Eigen::Map<const Mat>(jac_.data() + k * 2 * n_, n_, 2);
    tot += wk;
  }
  return tot > 0 ? Mat(acc / tot) : acc;
}

double RegionSamples::dirichlet_energy() const {
  double e = 0.0;
  for (std::size_t k = 0; k < w_.size(); ++k) {
    double s = 0.0;
    for (int c = 0; c < 2 * n_; ++c) s += jac_[k * 2 * n_ + c] * jac_[k * 2 * n_ + c];
    e += 0.5 * w_[k] * s;
  }
  return e;
}

Frame plane_in_frame(const Frame& pi_reference, const Frame& coords) {
  return Frame(pi_reference.rotation() * coords.rotation().transpose(), pi_reference.m());
}

Frame plane_to_reference(const Frame& pi_in_coords, const Frame& coords) {
  return Frame(pi_in_coords.rotation() * coords.rotation(), pi_in_coords.m());
}

ExcessReport cylindrical_excess(const SampledCurrent& T, const Region& C, const Frame& pi) {
  if (C.kind != Region::Kind::cylinder) {
    throw Error(ErrorKind::input, "cylindrical_excess: region is not a cylinder");
  }
  const Vec2 q = C.center.head<2>();
  const bool same_frame =
      (C.frame.rotation() - T.frame.rotation()).cwiseAbs().maxCoeff() < 1e-14;
  RegionSamples s;
  if (same_frame) {
    s = RegionSamples::cylinder(T, q, C.radius);
  } else {
    const double margin = 2.0 * T.base.h();
    const SampledCurrent chart = chart_over_plane(T, C.frame, q, C.radius + margin, T.base.h());
    s = RegionSamples::cylinder(chart, q, C.radius);
  }
  const double area = s.area();
  ExcessReport rep;
  rep.kind = ExcessReport::Kind::cylindrical;
  rep.region = C;
  rep.plane = pi;
  rep.value = (s.mass() - area) / area;
  const Frame pi_local = plane_in_frame(pi, C.frame);
  rep.tilt_form = s.excess_measure(pi_local.plane_basis()) / area;
  return rep;
}

double plane_excess(const SampledCurrent& T, const Region& B, const Frame& pi) {
  if (B.kind != Region::Kind::ball) throw Error(ErrorKind::input, "plane_excess: region is not a ball");
  const Vec p = T.frame.to_frame(B.center);
  const RegionSamples s = RegionSamples::ball(T, p, B.radius);
  const double mass = s.mass();
  if (!(mass > 0)) throw Error(ErrorKind::precondition, "ball misses the support");
  return s.excess_measure(plane_in_frame(pi, T.frame).plane_basis()) / mass;
}

ExcessReport spherical_excess(const SampledCurrent& T, const Region& B) {
  if (B.kind != Region::Kind::ball) throw Error(ErrorKind::input, "spherical_excess: region is not a ball");
  const Vec p = T.frame.to_frame(B.center);
  const RegionSamples s = RegionSamples::ball(T, p, B.radius);
  const double mass = s.mass();
  if (s.size() == 0 || !(mass > 0)) {
    throw Error(ErrorKind::precondition, "spherical_excess: ball misses the support");
  }
  // Coordinate descent over the tilt entries, Newton steps from difference
  // quotients with backtracking.
  Mat L = s.mean_jacobian();
  auto objective = [&](const Mat& M) { return s.excess_measure_tilt(M) / mass; };
  double f0 = objective(L);
  int sweep = 0;
  const double d = 1e-5;
  for (; sweep < 200; ++sweep) {
    double largest = 0.0;
    for (int c = 0; c < L.size(); ++c) {
      Mat Lp = L, Lm = L;
      Lp(c) += d;
      Lm(c) -= d;
      const double fp = objective(Lp), fm = objective(Lm);
      const double g = (fp - fm) / (2 * d);
      const double H = (fp - 2 * f0 + fm) / (d * d);
      double step = H > 1e-12 ? -g / H : -g;
      step = std::clamp(step, -0.5, 0.5);
      for (int bt = 0; bt < 40; ++bt) {
        Mat Lt = L;
        Lt(c) += step;
        const double ft = objective(Lt);
        if (ft <= f0) {
          L = Lt;
          f0 = ft;
          break;
        }
        step *= 0.5;
        if (bt == 39) step = 0.0;
      }
      largest = std::max(largest, std::abs(step));
    }
    if (largest < 1e-10) break;
  }
  ExcessReport rep;
  rep.kind = ExcessReport::Kind::spherical;
  rep.region = B;
  rep.value = f0;
  rep.plane = plane_to_reference(Frame::from_tilt(L), T.frame);
  rep.iterations = sweep;
  return rep;
}

AdmissibilityResult is_admissible(const SampledCurrent& T, const Vec& p, double rho,
                                  const Frame& pi, const ConstantsConfig& cfg) {
  AdmissibilityResult r;
  r.lhs = plane_excess(T, Region::ball(p, rho), pi);
  r.rhs = cfg.Cmn * cfg.eps0 * cfg.eps0 * std::pow(rho, 2.0 - 2.0 * cfg.delta);
  r.margin = r.rhs - r.lhs;
  r.admissible = r.lhs <= r.rhs;
  return r;
}

Frame tangent_plane(const SampledCurrent& T, const Vec& p) {
  const Vec pf = T.frame.to_frame(p);
  const Vec2 q = pf.head<2>();
  for (const auto& d : T.defects) {
    if ((d.position.head<2>() - q).norm() <= T.base.h()) {
      throw Error(ErrorKind::precondition, "tangent_plane: point lies in a defect column");
    }
  }
  if ((q - T.base.center()).norm() > T.base.radius()) {
    throw Error(ErrorKind::precondition, "tangent_plane: point outside the sampled graph");
  }
  Vec val;
  Mat D;
  if (!graph_evaluator(T)(q, val, D)) {
    throw Error(ErrorKind::precondition, "tangent_plane: graph undefined at point");
  }
  return plane_to_reference(Frame::from_tilt(D), T.frame);
}

FirstVariation first_variation_residual(const GridFunction& f, const GridFunction& kappa,
                                        std::span<const std::uint8_t> good,
                                        std::span<const double> vertical_mass) {
  if (kappa.side() != f.side() || kappa.n() != f.n() || std::abs(kappa.h() - f.h()) > 1e-15 ||
      (kappa.center() - f.center()).norm() > 1e-15) {
    throw Error(ErrorKind::input, "first_variation_residual: kappa must share f's lattice");
  }
  const double collar = f.radius() - 2.0 * f.h();
  for (int j = 0; j < f.side(); ++j) {
    for (int i = 0; i < f.side(); ++i) {
      if ((f.node(i, j) - f.center()).norm() < collar) continue;
      for (int c = 0; c < f.n(); ++c) {
        const double v = kappa.at(i, j, c);
        if (std::isfinite(v) && std::abs(v) > 1e-14) {
          throw Error(ErrorKind::precondition, "first_variation_residual: kappa support leaves the domain");
        }
      }
    }
  }
  const auto w = disk_weights(f, f.center(), f.radius());
  FirstVariation out;
  double signed_lhs = 0.0, signed_area = 0.0;
  for (int j = 0; j < f.side(); ++j) {
    for (int i = 0; i < f.side(); ++i) {
      const std::size_t k = f.index(i, j);
      if (w[k] <= 0) continue;
      const Mat D = f.jacobian(i, j);
      Mat K = kappa.jacobian(i, j);
      if (!K.allFinite()) K.setZero();
      if (K.isZero(0.0)) continue;  // every integrand carries a factor of Dkappa
      if (!D.allFinite()) throw Error(ErrorKind::precondition, "first_variation_residual: f undefined");
      signed_lhs += w[k] * (D.array() * K.array()).sum();
      const Mat G = Mat::Identity(2, 2) + D.transpose() * D;
      const double J = std::sqrt(G.determinant());
      signed_area += w[k] * J * (G.inverse() * D.transpose() * K).trace();
      const double dk = K.norm(), df = D.norm();
      out.rhs += w[k] * dk * df * df * df;
      if (!good.empty() && !good[k]) {
        const double mu = vertical_mass.empty() ? 0.0 : vertical_mass[k];
        out.rhs += dk * (w[k] + mu);
      }
    }
  }
  out.lhs = std::abs(signed_lhs);
  out.area_variation = std::abs(signed_area);
  return out;
}

std::string to_string(ExcessReport::Kind kind) {
  return kind == ExcessReport::Kind::cylindrical ? "cylindrical" : "spherical";
}

}  // namespace cman
