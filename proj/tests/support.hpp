#pragma once

#include <cmath>
#include <random>

#include "cman/pipeline.hpp"

namespace support {

inline cman::SurfaceSpec spec(cman::SurfaceKind kind, double eps = 0.0, int resolution = 129) {
  cman::SurfaceSpec s;
  s.kind = kind;
  s.epsilon = eps;
  s.resolution = resolution;
  return s;
}

inline cman::SampledCurrent surface(cman::SurfaceKind kind, double eps = 0.0, int resolution = 129) {
  return cman::generate_surface(spec(kind, eps, resolution));
}

inline cman::SampledCurrent tilted(double l1, double l2, int resolution = 129) {
  cman::SurfaceSpec s = spec(cman::SurfaceKind::tilted, 0.0, resolution);
  s.tilt = cman::Mat(1, 2);
  s.tilt << l1, l2;
  return cman::generate_surface(s);
}

inline cman::Frame pi0() { return cman::Frame::identity(2, 1); }

inline cman::Region cylinder(double qx, double qy, double r, const cman::Frame& f = pi0()) {
  return cman::Region::cylinder(cman::Vec2(qx, qy), r, f);
}

// Grid function filled from a scalar formula.
template <class F>
cman::GridFunction grid(double r, double h, F f, cman::Vec2 c = cman::Vec2::Zero()) {
  cman::GridFunction g(c, r, h, 1);
  g.fill([&](const cman::Vec2& x) {
    cman::Vec v(1);
    v(0) = f(x.x(), x.y());
    return v;
  });
  return g;
}

// One seeded instance of the L1 rotation comparison: two random functions
// with Lipschitz constant <= 0.9 c0 on B_{2r}(0) and a rotation R with
// |R - Id| <= c0, both seen over B_r(0) of the rotated plane. Returns
// ||f' - g'||_{L1(B_r)} / ||f - g||_{L1(B_2r)}.
inline double rotation_l1_ratio(std::uint64_t seed, double c0, double r = 0.25, double h = 1.0 / 128) {
  using namespace cman;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1, 1);
  auto random_lipschitz = [&]() {
    struct Wave {
      double a, wx, wy, ph;
    };
    std::vector<Wave> waves(3);
    double lip = 0;
    for (auto& w : waves) {
      w = {u(rng), 4 * u(rng), 4 * u(rng), 3 * u(rng)};
      lip += std::abs(w.a) * std::hypot(w.wx, w.wy);
    }
    const double scale = 0.9 * c0 / lip;
    return grid(2 * r, h, [=](double x, double y) {
      double v = 0;
      for (const auto& w : waves) v += scale * w.a * std::sin(w.wx * x + w.wy * y + w.ph);
      return v;
    });
  };
  const GridFunction f = random_lipschitz(), g = random_lipschitz();
  // two small rotations in the (x1, y) and (x2, y) planes
  const double t1 = 0.45 * c0 * u(rng), t2 = 0.45 * c0 * u(rng);
  const Mat R = Frame::from_plane_rotation(2, 1, 0, 2, t1).rotation() * Frame::from_plane_rotation(2, 1, 1, 2, t2).rotation();
  RotateOptions opts;
  opts.c0 = c0;
  const GridFunction fr = rotate_graph(f, R, Vec2::Zero(), r, opts);
  const GridFunction gr = rotate_graph(g, R, Vec2::Zero(), r, opts);
  auto l1 = [](const GridFunction& a, const GridFunction& b, double rad) {
    const auto w = disk_weights(a, Vec2::Zero(), rad);
    double s = 0;
    for (std::size_t k = 0; k < w.size(); ++k)
      if (w[k] > 0) s += w[k] * std::abs(a.value(k)[0] - b.value(k)[0]);
    return s;
  };
  return l1(fr, gr, r) / l1(f, g, 2 * r);
}

}  // namespace support
