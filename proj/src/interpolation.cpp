#include "cman/interpolation.hpp"

#include <cmath>

#include "cman/excess.hpp"

namespace cman {
namespace {

template <class F>
auto stage(const char* name, F&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error& e) {
    throw e.with_context(name);
  }
}

}  // namespace

GridFunction rotate_graph(const GraphEval& f, const Mat& R, const Vec2& source_center,
                          double source_radius, const Vec2& target_center, double r, double h,
                          const RotateOptions& opts) {
  const int dim = static_cast<int>(R.rows());
  const int n = dim - 2;
  Eigen::JacobiSVD<Mat> svd(R - Mat::Identity(dim, dim));
  if (svd.singularValues()(0) > opts.c0) throw Error(ErrorKind::precondition, "rotate_graph: |A - Id| exceeds c0");
  GridFunction out(target_center, r, h, n);
  const Mat Rt = R.transpose();
  // Seed with the height over the target centre.
  Vec height = Vec::Zero(n);
  {
    Vec full(dim);
    full << target_center, Vec::Zero(n);
    const Vec2 x0 = (Rt * full).head<2>();
    if (auto inv = invert_graph_map(f, R, target_center, x0, opts.tol, opts.max_iter)) height = inv->value;
  }
  for (int j = 0; j < out.side(); ++j) {
    for (int i = 0; i < out.side(); ++i) {
      const Vec2 z = out.node(i, j);
      Vec full(dim);
      full << z, height;
      const Vec2 x0 = (Rt * full).head<2>();
      auto inv = invert_graph_map(f, R, z, x0, opts.tol, opts.max_iter);
      const bool inside = out.in_ball(i, j);
      if (!inv || (inv->source_point - source_center).norm() > source_radius * (1 + 1e-12)) {
        if (inside) {
          throw Error(ErrorKind::precondition,
                      inv ? "rotate_graph: target ball not covered by the source domain"
                          : "rotate_graph: inversion did not converge");
        }
        continue;
      }
      out.value(out.index(i, j)) = inv->value;
    }
  }
  return out;
}

GridFunction rotate_graph(const GridFunction& f, const Mat& R, const Vec2& target_center, double r,
                          const RotateOptions& opts) {
  if (f.lipschitz_local(4) > opts.c0 * (1 + 1e-9)) {
    throw Error(ErrorKind::precondition, "rotate_graph: Lip(f) exceeds c0");
  }
  return rotate_graph(grid_evaluator(f), R, f.center(), f.radius(), target_center, r, f.h(), opts);
}

Vec base_point(const SampledCurrent& T, const Vec2& c) {
  const Mat R = T.frame.rotation().transpose();  // frame -> reference
  const int dim = T.frame.dim();
  Vec full = Vec::Zero(dim);
  full.head<2>() = c;
  const Vec2 x0 = (T.frame.rotation() * full).head<2>();
  auto inv = invert_graph_map(graph_evaluator(T), R, c, x0);
  if (!inv) throw Error(ErrorKind::precondition, "base_point: no graph point above the requested base point");
  Vec p(dim);
  p << c, inv->value;
  return p;
}

Interpolant interpolate(const SampledCurrent& T, const Vec& p, double rho, const Frame& pi,
                        const ConstantsConfig& cfg, const InterpolateOptions& opts) {
  if (!(rho > 0)) throw Error(ErrorKind::input, "interpolate: rho must be > 0");
  Interpolant I;
  I.p = p;
  I.rho = rho;
  I.plane = pi;
  I.center = p.head<2>();
  const double h = rho / cfg.nodes_per_rho;
  I.h = h;
  const Vec pp = pi.to_frame(p);
  const Vec2 q = pp.head<2>();

  const SampledCurrent chart =
      stage("chart", [&] { return chart_over_plane(T, pi, q, 8 * rho + 3 * h, h); });
  const AdmissibilityResult adm = stage("admissibility", [&] { return is_admissible(chart, p, 8 * rho, pi, cfg); });
  I.admissibility_lhs = adm.lhs;
  I.admissibility_rhs = adm.rhs;
  if (!adm.admissible) throw Error(ErrorKind::precondition, "admissibility: plane not admissible at 8 rho");

  Vec qv(2);
  qv << q;
  LipApprox A = stage("approximate", [&] { return approximate(chart, Region::cylinder(qv, 8 * rho, pi), cfg); });
  I.E = A.E;
  I.approx = A.stats;
  if (A.s < 6 * rho) throw Error(ErrorKind::precondition, "approximate: approximation radius below 6 rho");

  GridFunction f_lip = A.f.with_radius(6 * rho);
  GridFunction f_hat = stage("mollify", [&] { return mollify(f_lip, rho); });
  HarmonicSolve hs = stage("harmonic_extend", [&] { return harmonic_extend(f_hat, q, 4 * rho, opts.scheme); });
  I.harmonic_residual = hs.residual;
  I.f_bar_model = stage("harmonic_fit", [&] { return HarmonicPolynomial::fit(hs.value, q, 4 * rho, cfg.harmonic_degree); });

  const HarmonicPolynomial& P = I.f_bar_model;
  const GraphEval fbar = [&P](const Vec2& x, Vec& v, Mat& J) {
    v = P.value(x);
    J = P.jacobian(x);
    return true;
  };
  const Mat R = pi.rotation().transpose();
  I.g = stage("rotate_graph", [&] { return rotate_graph(fbar, R, q, 4 * rho, I.center, rho + 3 * h, h); });
  I.model = stage("local_fit", [&] { return Polynomial::fit(I.g, I.center, rho, cfg.poly_degree); });
  I.jets.resize(I.g.n(), jet_size(4));
  std::vector<double> jet(jet_size(4));
  for (int c = 0; c < I.g.n(); ++c) {
    I.model.planar_jet(I.center, c, 4, jet.data());
    for (int t = 0; t < jet_size(4); ++t) I.jets(c, t) = jet[t];
  }
  if (opts.keep_stages) {
    I.f_lip = std::move(f_lip);
    I.f_hat = std::move(f_hat);
    I.f_bar = std::move(hs.value);
  }
  return I;
}

}  // namespace cman
