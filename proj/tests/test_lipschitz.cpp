#include <cmath>
#include <numbers>

#include "doctest.h"
#include "oracles.hpp"
#include "support.hpp"

using namespace cman;

namespace {

// Flat plane on a 33^2 lattice with one vertical defect above the origin.
SampledCurrent spike(double mass) {
  SampledCurrent T = support::surface(SurfaceKind::plane, 0.0, 33);
  DefectSample d;
  d.position = Vec::Zero(3);
  d.position(2) = 0.1;
  d.tangent = Mat::Zero(2, 3);
  d.tangent(0, 0) = 1;
  d.tangent(1, 2) = 1;
  d.mass = mass;
  T.defects.push_back(d);
  T.refresh_mask();
  return T;
}

std::vector<double> ladder(double h, double r) {
  std::vector<double> out;
  for (int j = 0; std::ldexp(h, j) <= r * (1 + 1e-12); ++j) out.push_back(std::ldexp(h, j));
  return out;
}

}  // namespace

TEST_SUITE("lipschitz_approx") {

TEST_CASE("maximal function: flat graph vanishes") {
  const auto T = support::surface(SurfaceKind::plane, 0.0, 65);
  const MaximalField M = maximal_excess(T, support::cylinder(0, 0, 1));
  for (int j = 0; j < M.M.side(); ++j)
    for (int i = 0; i < M.M.side(); ++i)
      if (M.M.in_ball(i, j, -1e-9) && (M.M.node(i, j)).norm() <= 1) CHECK(M.M.at(i, j, 0) == 0.0);
}

TEST_CASE("maximal function: single spike against brute force") {
  const double mu = 0.01;
  const SampledCurrent T = spike(mu);
  const GridFunction& g = T.base;
  const double h = g.h();
  // independent density: zero on the flat graph, mu / h^2 at the spike node
  std::vector<double> dens(g.node_count(), 0.0);
  dens[g.index(g.half(), g.half())] = mu / (h * h);
  const MaximalField M = maximal_excess(T, support::cylinder(0, 0, 1));
  const auto ref = oracle::brute_maximal(dens, g.side(), h, 0, 0, 0, 0, 1, ladder(h, 1));
  std::size_t compared = 0;
  for (std::size_t k = 0; k < g.node_count(); ++k) {
    if (std::isnan(ref[k])) continue;
    ++compared;
    CHECK(M.M.value(k)[0] == doctest::Approx(ref[k]).epsilon(1e-12));
  }
  CHECK(compared > 700);
  // decay away from the spike: M(x) >= mu / (pi |x|^2) roughly, and monotone along a ray
  double prev = HUGE_VAL;
  for (int i = g.half(); i < g.side(); ++i) {
    const double v = M.M.at(i, g.half(), 0);
    if (std::isnan(v)) break;
    CHECK(v <= prev);
    prev = v;
  }
}

TEST_CASE("maximal function: good set equals the oracle's") {
  const SampledCurrent T = spike(0.01);
  const GridFunction& g = T.base;
  const double h = g.h();
  std::vector<double> dens(g.node_count(), 0.0);
  dens[g.index(g.half(), g.half())] = 0.01 / (h * h);
  const MaximalField M = maximal_excess(T, support::cylinder(0, 0, 1));
  const auto ref = oracle::brute_maximal(dens, g.side(), h, 0, 0, 0, 0, 1, ladder(h, 1));
  for (double t : {0.5, 0.1, 0.02}) {
    const GoodSet gs = good_set(M, t);
    for (std::size_t k = 0; k < g.node_count(); ++k) {
      const std::uint8_t want = !std::isnan(ref[k]) && ref[k] <= t;
      CHECK(gs.K[k] == want);
    }
  }
}

TEST_CASE("maximal function: linear graph is constant") {
  const auto T = support::tilted(0.3, 0.4, 65);
  const MaximalField M = maximal_excess(T, support::cylinder(0, 0, 1));
  const double e = oracle::tilted_plane_excess(0.3, 0.4);
  for (std::size_t k = 0; k < M.M.node_count(); ++k) {
    const double v = M.M.value(k)[0];
    if (!std::isnan(v)) CHECK(v == doctest::Approx(e).epsilon(1e-12));
  }
}

TEST_CASE("maximal function: monotone in the ladder") {
  const auto T = support::surface(SurfaceKind::harmonic_quadratic, 0.1, 65);
  const double h = T.base.h();
  const MaximalField a = maximal_excess(T, support::cylinder(0, 0, 1), {h, 2 * h});
  const MaximalField b = maximal_excess(T, support::cylinder(0, 0, 1), {h, 2 * h, 4 * h, 8 * h});
  for (std::size_t k = 0; k < a.M.node_count(); ++k) {
    const double x = a.M.value(k)[0], y = b.M.value(k)[0];
    if (std::isnan(x)) continue;
    CHECK(x >= 0.0);
    CHECK(y >= x);
  }
}

TEST_CASE("good set trivial cases") {
  const auto T = support::surface(SurfaceKind::plane, 0.0, 33);
  const MaximalField M = maximal_excess(T, support::cylinder(0, 0, 1));
  for (double t : {1e-6, HUGE_VAL}) {
    const GoodSet gs = good_set(M, t);
    for (std::size_t k = 0; k < M.M.node_count(); ++k) CHECK(bool(gs.K[k]) == !std::isnan(M.M.value(k)[0]));
  }
  CHECK_THROWS_AS(good_set(M, 0.0), Error);
}

TEST_CASE("McShane extension") {
  SUBCASE("K = all nodes reproduces g") {
    const GridFunction g = support::grid(0.5, 1.0 / 32, [](double x, double y) { return 0.2 * x - 0.1 * y; });
    std::vector<std::uint8_t> K(g.node_count(), 0);
    for (int j = 0; j < g.side(); ++j)
      for (int i = 0; i < g.side(); ++i) K[g.index(i, j)] = g.in_ball(i, j);
    const GridFunction e = lipschitz_extend(g, K, 0.3);
    for (std::size_t k = 0; k < g.node_count(); ++k)
      if (K[k]) CHECK(e.value(k)[0] == g.value(k)[0]);
  }
  SUBCASE("single point: symmetrised value is the constant") {
    const GridFunction g = support::grid(0.5, 1.0 / 32, [](double, double) { return 0.7; });
    std::vector<std::uint8_t> K(g.node_count(), 0);
    K[g.index(g.half(), g.half())] = 1;
    const GridFunction e = lipschitz_extend(g, K, 0.5);
    for (int j = 0; j < g.side(); ++j)
      for (int i = 0; i < g.side(); ++i)
        if (g.in_ball(i, j)) CHECK(e.at(i, j, 0) == doctest::Approx(0.7).epsilon(1e-14));
  }
  SUBCASE("linear data across a convex hole") {
    const double lx = 0.3, ly = -0.4;  // |L| = 0.5
    const GridFunction g = support::grid(0.5, 1.0 / 64, [&](double x, double y) { return lx * x + ly * y; });
    std::vector<std::uint8_t> K(g.node_count(), 0);
    for (int j = 0; j < g.side(); ++j)
      for (int i = 0; i < g.side(); ++i)
        K[g.index(i, j)] = g.in_ball(i, j) && (g.node(i, j) - Vec2(0.1, 0.05)).norm() > 0.15;
    double used = 0;
    const GridFunction e = lipschitz_extend(g, K, 0.5, &used);
    CHECK(used >= 0.5);
    for (int j = 0; j < g.side(); ++j) {
      for (int i = 0; i < g.side(); ++i) {
        if (!g.in_ball(i, j) || K[g.index(i, j)]) continue;
        const Vec2 x = g.node(i, j);
        CHECK(std::abs(e.at(i, j, 0) - (lx * x.x() + ly * x.y())) <= used * g.h());
      }
    }
  }
  SUBCASE("bound violated on K") {
    const GridFunction g = support::grid(0.5, 1.0 / 32, [](double x, double) { return x; });
    std::vector<std::uint8_t> K(g.node_count(), 0);
    for (int j = 0; j < g.side(); ++j)
      for (int i = 0; i < g.side(); ++i) K[g.index(i, j)] = g.in_ball(i, j);
    CHECK_THROWS_AS(lipschitz_extend(g, K, 0.5), Error);
  }
}

TEST_CASE("approximation of a clean graph is the graph itself") {
  ConstantsConfig cfg;
  const auto T = support::surface(SurfaceKind::harmonic_quadratic, 0.05);
  const LipApprox A = approximate(T, support::cylinder(0, 0, 1), cfg);
  const GridFunction& f = A.f;
  std::size_t interior = 0;
  bool all_in_K = true, exact = true;
  for (int j = 0; j < f.side(); ++j) {
    for (int i = 0; i < f.side(); ++i) {
      if (!f.in_ball(i, j)) continue;
      ++interior;
      const std::size_t k = f.index(i, j);
      all_in_K = all_in_K && A.K[k];
      const auto [bi, bj] = T.base.nearest(f.node(i, j));
      exact = exact && f.at(i, j, 0) == T.base.at(bi, bj, 0) && f.node(i, j) == T.base.node(bi, bj);
    }
  }
  CHECK(interior > 10000);
  CHECK(all_in_K);
  CHECK(exact);
  CHECK(A.stats.bad_measure == 0.0);
  MESSAGE("energy gap / E^{1+eta} = " << A.stats.energy_gap / std::pow(A.E, 1 + cfg.eta));
  CHECK(A.stats.energy_gap <= std::pow(A.E, 1 + cfg.eta));
}

TEST_CASE("approximation of a flat plane") {
  ConstantsConfig cfg;
  const auto T = support::surface(SurfaceKind::plane, 0.0, 65);
  const LipApprox A = approximate(T, support::cylinder(0, 0, 1), cfg);
  for (int j = 0; j < A.f.side(); ++j)
    for (int i = 0; i < A.f.side(); ++i)
      if (A.f.in_ball(i, j)) CHECK(A.f.at(i, j, 0) == 0.0);
  CHECK(A.stats.bad_measure == 0.0);
  CHECK(A.stats.energy_gap <= 1e-12);
}

TEST_CASE("approximation of a spiked current: bad set") {
  ConstantsConfig cfg;
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    SurfaceSpec s = support::spec(SurfaceKind::spiked, 0.05, 65);
    s.base = SurfaceKind::harmonic_quadratic;
    s.defect_fraction = 1e-3;
    s.seed = seed;
    const auto T = generate_surface(s);
    REQUIRE(!T.defects.empty());
    const LipApprox A = approximate(T, support::cylinder(0, 0, 1), cfg);
    // direct count of the bad nodes of B_s
    std::size_t bad = 0;
    for (int j = 0; j < A.f.side(); ++j)
      for (int i = 0; i < A.f.side(); ++i)
        if (A.f.in_ball(i, j) && !A.K[A.f.index(i, j)]) ++bad;
    const double h = A.f.h();
    CHECK(A.stats.bad_measure == doctest::Approx(bad * h * h));
    CHECK(bad > 0);
    CHECK(A.stats.bad_measure <= 1.05 * A.stats.bad_bound);
    CHECK(A.stats.bad_measure <= A.stats.bad_bound_coarse);
    CHECK(A.f.all_finite_in_ball());
    CHECK(A.stats.lip_const <= 1.05 * A.lip_bound);
  }
}

TEST_CASE("approximation preconditions") {
  ConstantsConfig cfg;
  const auto T = support::tilted(0.5, 0.5, 65);
  CHECK_THROWS_AS(approximate(T, support::cylinder(0, 0, 1), cfg), Error);
}

TEST_CASE("slice BV inequality") {
  SUBCASE("linear graph against the polar quadrature") {
    const double lx = 0.2, ly = 0.1;
    const auto T = support::tilted(lx, ly);
    SliceTest t{[](const Vec& v) { return std::tanh(v(0)); }, 1.0};
    const SliceCheck c = bv_slice_check(T, t, Vec2::Zero(), 0.5);
    const double nl = std::hypot(lx, ly), J = std::sqrt(1 + nl * nl);
    const double tv = oracle::disk_integral(
        [&](double x, double y) { return nl / std::pow(std::cosh(lx * x + ly * y), 2); }, 0, 0, 0.5);
    const double area = std::numbers::pi / 4;
    CHECK(c.lhs == doctest::Approx(tv * tv).epsilon(0.03));
    CHECK(c.rhs == doctest::Approx(2 * (J - 1) * J * area * area).epsilon(1e-3));
    CHECK(c.lhs < c.rhs);
  }
  SUBCASE("harmonic quadratic family") {
    for (double eps : {0.2, 0.1, 0.05}) {
      const auto T = support::surface(SurfaceKind::harmonic_quadratic, eps);
      SliceTest t{[](const Vec& v) { return std::sin(v(0)); }, 1.0};
      const SliceCheck c = bv_slice_check(T, t, Vec2(0.1, 0.0), 0.5);
      MESSAGE("eps " << eps << " slice ratio " << c.lhs / c.rhs);
      CHECK(c.lhs <= c.rhs);
    }
  }
}

}  // TEST_SUITE
