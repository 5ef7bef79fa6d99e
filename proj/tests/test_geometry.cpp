#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "support.hpp"

using namespace cman;
using support::pi0;

TEST_SUITE("geometry") {

TEST_CASE("constants: defaults validate, broken orderings are rejected") {
  ConstantsConfig c;
  CHECK_NOTHROW(c.validate());
  ConstantsConfig bad = c;
  bad.alpha = 1.5;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = c;
  bad.n0 = bad.k0;
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = c;
  bad.grid_h = 0;
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("frame invariants hold for random tilts") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-0.8, 0.8);
  for (int t = 0; t < 50; ++t) {
    Mat L(1, 2);
    L << u(rng), u(rng);
    const Frame f = Frame::from_tilt(L);
    const Mat& A = f.rotation();
    CHECK((A.transpose() * A - Mat::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(std::abs(A.determinant() - 1) < 1e-12);
    CHECK(std::abs(mvector_norm(f.plane_basis()) - 1) < 1e-12);
    CHECK((f.tilt() - L).cwiseAbs().maxCoeff() < 1e-12);
  }
  CHECK_THROWS_AS(Frame(Mat::Identity(3, 3) * 2, 2), Error);
}

TEST_CASE("plane distance: rotation by a small angle") {
  const double a = 0.01;
  const Frame f = Frame::from_plane_rotation(2, 1, 0, 2, a);
  // |e1^e2 - e1'^e2|^2 = 2 - 2 cos a
  CHECK(f.distance(pi0()) == doctest::Approx(std::sqrt(2 - 2 * std::cos(a))).epsilon(1e-9));
  CHECK(pi0().distance(pi0()) == 0.0);
}

TEST_CASE("disk quadrature weights integrate polynomials") {
  const GridFunction g(Vec2::Zero(), 1.1, 1.0 / 64, 1);
  const auto w = disk_weights(g, Vec2(0.1, -0.05), 0.8);
  double area = 0, mx = 0, m2 = 0;
  for (std::size_t k = 0; k < w.size(); ++k) {
    const Vec2 x = g.node(k) - Vec2(0.1, -0.05);
    area += w[k];
    mx += w[k] * x.x();
    m2 += w[k] * x.squaredNorm();
  }
  const double r = 0.8;
  CHECK(area == doctest::Approx(std::numbers::pi * r * r).epsilon(1e-5));
  CHECK(std::abs(mx) < 5e-5);
  CHECK(m2 == doctest::Approx(std::numbers::pi * std::pow(r, 4) / 2).epsilon(1e-4));
}

TEST_CASE("cylindrical excess closed forms") {
  SUBCASE("flat graph") {
    const auto T = support::surface(SurfaceKind::plane);
    CHECK(cylindrical_excess(T, support::cylinder(0, 0, 1), pi0()).value == doctest::Approx(0.0));
  }
  SUBCASE("tilted plane") {
    const auto T = support::tilted(0.3, 0.4);
    const double v = cylindrical_excess(T, support::cylinder(0, 0, 1), pi0()).value;
    CHECK(std::abs(v - (std::sqrt(1.25) - 1)) < 1e-6);
    CHECK(std::abs(oracle::tilted_plane_excess(0.3, 0.4) - (std::sqrt(1.25) - 1)) < 1e-15);
  }
  SUBCASE("harmonic quadratic against the polar quadrature") {
    const double eps = 0.1;
    const auto T = support::surface(SurfaceKind::harmonic_quadratic, eps);
    const double v = cylindrical_excess(T, support::cylinder(0, 0, 1), pi0()).value;
    const double quad = oracle::graph_excess(
        [&](double x, double y) { return Eigen::Vector2d(2 * eps * x, -2 * eps * y); }, 0, 0, 1);
    CHECK(std::abs(quad - oracle::harmonic_quadratic_excess(eps, 1)) < 1e-12);
    // midpoint error ~ h^2 / 24 * mean of Laplacian of the area density
    CHECK(std::abs(v - quad) < 2e-6);
    const auto F = support::surface(SurfaceKind::harmonic_quadratic, eps, 257);
    const double vf = cylindrical_excess(F, support::cylinder(0, 0, 1), pi0()).value;
    CHECK(std::abs(vf - quad) < std::abs(v - quad) / 3);
  }
  SUBCASE("off-centre cylinder") {
    const double eps = 0.1;
    const auto T = support::surface(SurfaceKind::harmonic_quadratic, eps);
    const double v = cylindrical_excess(T, support::cylinder(0.25, -0.125, 0.5), pi0()).value;
    const double quad = oracle::graph_excess(
        [&](double x, double y) { return Eigen::Vector2d(2 * eps * x, -2 * eps * y); }, 0.25, -0.125, 0.5);
    CHECK(std::abs(v - quad) < 2e-6);
  }
}

TEST_CASE("excess is nonnegative and dimensionless under dilation") {
  // f(x) = eps (x1^2 - x2^2) on B_1 equals, after scaling by s, the graph of
  // (eps / s)(x1^2 - x2^2) on B_s.
  const double eps = 0.1, s = 0.5;
  const auto T1 = support::surface(SurfaceKind::harmonic_quadratic, eps);
  const auto Ts = support::surface(SurfaceKind::harmonic_quadratic, eps / s);
  const double e1 = cylindrical_excess(T1, support::cylinder(0, 0, 1), pi0()).value;
  const double es = cylindrical_excess(Ts, support::cylinder(0, 0, s), pi0()).value;
  CHECK(e1 >= -1e-10);
  CHECK(std::abs(e1 - es) < 1e-5);
}

TEST_CASE("spherical excess") {
  SUBCASE("flat") {
    const auto T = support::surface(SurfaceKind::plane);
    const ExcessReport r = spherical_excess(T, Region::ball(Vec::Zero(3), 0.5));
    CHECK(std::abs(r.value) < 1e-12);
    CHECK(r.plane.distance(pi0()) < 1e-8);
  }
  SUBCASE("tilted plane is its own minimiser") {
    const auto T = support::tilted(0.3, 0.4);
    const ExcessReport r = spherical_excess(T, Region::ball(Vec::Zero(3), 0.5));
    Mat L(1, 2);
    L << 0.3, 0.4;
    CHECK(r.value <= 1e-8);
    CHECK(r.plane.distance(Frame::from_tilt(L)) < 1e-4);
  }
  SUBCASE("minimisation does not exceed the reference plane") {
    const auto T = support::surface(SurfaceKind::harmonic_quadratic, 0.1);
    const double sph = spherical_excess(T, Region::ball(Vec::Zero(3), 0.5)).value;
    const double ref = plane_excess(T, Region::ball(Vec::Zero(3), 0.5), pi0());
    CHECK(sph <= ref + 1e-12);
  }
}

TEST_CASE("admissibility") {
  ConstantsConfig cfg;
  SUBCASE("flat: margin equals the budget") {
    const auto T = support::surface(SurfaceKind::plane);
    const double rho = 1.0 / 16;
    const auto a = is_admissible(T, base_point(T, Vec2::Zero()), rho, pi0(), cfg);
    const double rhs = cfg.Cmn * cfg.eps0 * cfg.eps0 * std::pow(rho, 2 - 2 * cfg.delta);
    CHECK(a.admissible);
    CHECK(a.margin == doctest::Approx(rhs).epsilon(1e-9));
  }
  SUBCASE("tilted plane against pi_0") {
    const auto T = support::tilted(0.5, 0.0);
    const auto a = is_admissible(T, base_point(T, Vec2::Zero()), 1.0 / 16, pi0(), cfg);
    CHECK_FALSE(a.admissible);
    // 1/2 |tau - pi_0|^2 >= angle^2 / 2 with angle = atan 0.5
    CHECK(a.lhs >= 0.5 * std::pow(std::atan(0.5), 2) * 0.9);
  }
  SUBCASE("small harmonic quadratic") {
    const auto T = support::surface(SurfaceKind::harmonic_quadratic, 0.05);
    for (double rho : {0.5, 0.25, 0.125, 0.0625}) {
      CHECK(is_admissible(T, base_point(T, Vec2::Zero()), rho, pi0(), cfg).admissible);
    }
  }
}

TEST_CASE("tangent plane") {
  SUBCASE("flat") {
    const auto T = support::surface(SurfaceKind::plane);
    CHECK(tangent_plane(T, base_point(T, Vec2(0.2, 0.1))).distance(pi0()) < 1e-12);
  }
  SUBCASE("linear graph, any base point") {
    const auto T = support::tilted(0.3, -0.2);
    Mat L(1, 2);
    L << 0.3, -0.2;
    for (Vec2 c : {Vec2(0, 0), Vec2(0.3, -0.4)}) {
      CHECK(tangent_plane(T, base_point(T, c)).distance(Frame::from_tilt(L)) < 1e-9);
    }
  }
  SUBCASE("harmonic quadratic matches the analytic gradient") {
    const double eps = 0.1;
    const auto T = support::surface(SurfaceKind::harmonic_quadratic, eps);
    const Vec2 c(0.25, 0.125);
    Mat L(1, 2);
    L << 2 * eps * c.x(), -2 * eps * c.y();
    CHECK(tangent_plane(T, base_point(T, c)).distance(Frame::from_tilt(L)) < 1e-6);
  }
}

TEST_CASE("first variation") {
  auto bump = [](const GridFunction& like, Vec2 c = Vec2::Zero()) {
    GridFunction k(like.center(), like.radius(), like.h(), 1);
    k.fill([c](const Vec2& x) {
      Vec v(1);
      const double t = (x - c).squaredNorm() / 0.25;
      v(0) = t < 1 ? std::exp(-1 / (1 - t)) : 0.0;
      return v;
    });
    return k;
  };
  SUBCASE("flat graph") {
    const auto T = support::surface(SurfaceKind::plane);
    CHECK(first_variation_residual(T.base, bump(T.base)).lhs == 0.0);
  }
  SUBCASE("harmonic quadratic: cubic residual") {
    std::vector<double> ratio;
    for (double eps : {0.1, 0.05, 0.025}) {
      const auto T = support::surface(SurfaceKind::harmonic_quadratic, eps);
      const auto fv = first_variation_residual(T.base, bump(T.base));
      ratio.push_back(fv.area_variation / std::pow(eps, 3));
    }
    for (double r : ratio) CHECK(r < 2 * ratio.front() + 1e-12);
  }
  SUBCASE("Enneper: area variation shrinks at second order") {
    // off-centre bump: a centred one cancels by the patch's symmetry
    std::vector<double> v;
    for (int res : {65, 129}) {
      const auto T = support::surface(SurfaceKind::enneper, 0.1, res);
      const double h = T.base.h();
      v.push_back(first_variation_residual(T.base, bump(T.base, Vec2(0.2, 0.1))).area_variation);
      CHECK(v.back() <= 10 * h * h);
    }
    MESSAGE("Enneper area variation at h, h/2: " << v[0] << ", " << v[1]);
    CHECK(v[1] <= v[0] / 3);
  }
}

TEST_CASE("surfaces") {
  SUBCASE("plane is identically zero") {
    const auto T = support::surface(SurfaceKind::plane);
    bool zero = true;
    for (int j = 0; j < T.base.side(); ++j)
      for (int i = 0; i < T.base.side(); ++i)
        if (T.base.in_ball(i, j)) zero = zero && T.base.at(i, j, 0) == 0.0;
    CHECK(zero);
  }
  SUBCASE("spiked defect count and reproducibility") {
    SurfaceSpec s = support::spec(SurfaceKind::spiked, 0.0, 65);
    s.base = SurfaceKind::plane;
    s.defect_fraction = 1e-3;
    s.seed = 7;
    const auto a = generate_surface(s);
    const auto b = generate_surface(s);
    long nodes = 0;
    for (std::size_t k = 0; k < a.base.node_count(); ++k) nodes += a.base.node(k).norm() <= s.radius;
    CHECK(long(a.defects.size()) == std::lround(1e-3 * nodes));
    REQUIRE(a.defects.size() == b.defects.size());
    for (std::size_t i = 0; i < a.defects.size(); ++i) CHECK(a.defects[i].position == b.defects[i].position);
    CHECK_NOTHROW(a.validate());
  }
  SUBCASE("invalid specs") {
    SurfaceSpec s = support::spec(SurfaceKind::enneper, 0.0);
    CHECK_THROWS_AS(s.validate(), Error);
    s = support::spec(SurfaceKind::plane, 0.0, 17);
    CHECK_THROWS_AS(s.validate(), Error);
  }
}

TEST_CASE("graph inversion undoes a rotation") {
  const auto T = support::surface(SurfaceKind::harmonic_quadratic, 0.1);
  const GraphEval f = graph_evaluator(T);
  const Mat R = Frame::from_plane_rotation(2, 1, 0, 2, 0.05).rotation();
  const Vec2 z(0.2, -0.1);
  const auto inv = invert_graph_map(f, R, z, z);
  REQUIRE(inv.has_value());
  Vec v;
  Mat J;
  REQUIRE(f(inv->source_point, v, J));
  Vec X(3);
  X << inv->source_point, v;
  const Vec Y = R * X;
  CHECK((Y.head<2>() - z).norm() < 1e-10);
  CHECK(std::abs(Y(2) - inv->value(0)) < 1e-10);
}

}  // TEST_SUITE
