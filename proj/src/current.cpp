#include "cman/current.hpp"

#include <cmath>

#include "cman/config.hpp"

namespace cman {

void SampledCurrent::validate() const {
  if (base.n() != n()) throw Error(ErrorKind::input, "SampledCurrent: base dimension != frame codimension");
  if (m() != 2) throw Error(ErrorKind::input, "SampledCurrent: sampled graphs require m = 2");
  if (!base.all_finite_in_ball()) throw Error(ErrorKind::input, "SampledCurrent: non-finite base values");
  if (!base_mask.empty() && base_mask.size() != base.node_count()) {
    throw Error(ErrorKind::input, "SampledCurrent: base_mask size mismatch");
  }
  for (const auto& d : defects) {
    if (!(d.mass > 0)) throw Error(ErrorKind::input, "SampledCurrent: defect mass must be > 0");
    if (d.position.size() != frame.dim() || d.tangent.rows() != m() || d.tangent.cols() != frame.dim()) {
      throw Error(ErrorKind::input, "SampledCurrent: defect shape mismatch");
    }
    if (std::abs(mvector_norm(d.tangent) - 1.0) > 1e-9) {
      throw Error(ErrorKind::input, "SampledCurrent: defect tangent is not unit");
    }
  }
}

void SampledCurrent::refresh_mask() {
  base_mask.assign(base.node_count(), 1);
  for (const auto& d : defects) {
    const auto [i, j] = base.nearest(d.position.head<2>());
    if (base.in_lattice(i, j)) base_mask[base.index(i, j)] = 0;
  }
}

Region Region::ball(Vec center, double radius) {
  if (!(radius > 0)) throw Error(ErrorKind::input, "Region: radius must be > 0");
  Region r;
  r.kind = Kind::ball;
  r.center = std::move(center);
  r.radius = radius;
  r.frame = Frame::identity(2, static_cast<int>(r.center.size()) - 2);
  return r;
}

Region Region::cylinder(Vec q, double radius, Frame frame) {
  if (!(radius > 0)) throw Error(ErrorKind::input, "Region: radius must be > 0");
  Region r;
  r.kind = Kind::cylinder;
  r.center = std::move(q);
  r.radius = radius;
  r.frame = std::move(frame);
  return r;
}

GraphEval grid_evaluator(const GridFunction& g) {
  return [&g](const Vec2& x, Vec& val, Mat& jac) {
    if (!g.interpolate(x, val)) return false;
    const double d = 1e-4 * g.h();
    Vec a, b;
    jac.resize(g.n(), 2);
    for (int k = 0; k < 2; ++k) {
      Vec2 e = Vec2::Zero();
      e[k] = d;
      if (!g.interpolate(x + e, a) || !g.interpolate(x - e, b)) return false;
      jac.col(k) = (a - b) / (2 * d);
    }
    return true;
  };
}

GraphEval graph_evaluator(const SampledCurrent& T) {
  if (T.source) {
    auto src = T.source;
    return [src](const Vec2& x, Vec& val, Mat& jac) { return src->eval(x, val, jac); };
  }
  return grid_evaluator(T.base);
}

std::optional<GraphInversion> invert_graph_map(const GraphEval& f, const Mat& R, const Vec2& z,
                                               const Vec2& initial, double tol, int max_iter) {
  const int dim = static_cast<int>(R.rows());
  const int n = dim - 2;
  const Mat Rpp = R.topLeftCorner(2, 2), Rpq = R.topRightCorner(2, n);
  Vec2 x = initial;
  Vec val;
  Mat jac;
  for (int it = 1; it <= max_iter; ++it) {
    if (!f(x, val, jac)) return std::nullopt;
    const Vec2 resid = Rpp * x + Rpq * val - z;
    const Eigen::Matrix2d DI = Rpp + Rpq * jac;
    const Vec2 step = DI.partialPivLu().solve(resid);
    x -= step;
    if (step.norm() <= tol * std::max(1.0, x.norm())) {
      if (!f(x, val, jac)) return std::nullopt;
      Vec full(dim);
      full << x, val;
      const Vec y = R * full;
      return GraphInversion{x, y.tail(n), it};
    }
  }
  return std::nullopt;
}

SampledCurrent chart_over_plane(const SampledCurrent& T, const Frame& plane, const Vec2& q,
                                double radius, double h) {
  const int n = T.n();
  const Mat R = plane.rotation() * T.frame.rotation().transpose();
  const Mat Rt = R.transpose();
  const GraphEval f = graph_evaluator(T);

  SampledCurrent out;
  out.frame = plane;
  out.source = nullptr;
  out.base = GridFunction(q, radius, h, n);
  GridFunction& g = out.base;

  Vec guess_height = Vec::Zero(n);
  {
    // Height of the graph above the chart centre seeds every Newton solve.
    Vec full(2 + n);
    full << q, Vec::Zero(n);
    const Vec2 x0 = (Rt * full).head<2>();
    if (auto inv = invert_graph_map(f, R, q, x0)) guess_height = inv->value;
  }
  for (int j = 0; j < g.side(); ++j) {
    for (int i = 0; i < g.side(); ++i) {
      const Vec2 z = g.node(i, j);
      Vec full(2 + n);
      full << z, guess_height;
      const Vec2 x0 = (Rt * full).head<2>();
      auto inv = invert_graph_map(f, R, z, x0);
      if (!inv) {
        if (g.in_ball(i, j)) {
          throw Error(ErrorKind::precondition, "chart_over_plane: chart leaves the sampled domain");
        }
        continue;
      }
      g.value(g.index(i, j)) = inv->value;
    }
  }
  for (const auto& d : T.defects) {
    DefectSample e;
    e.position = R * d.position;
    e.tangent = d.tangent * Rt;
    e.mass = d.mass;
    if ((e.position.head<2>() - q).norm() <= radius) out.defects.push_back(std::move(e));
  }
  out.refresh_mask();
  return out;
}

}  // namespace cman
