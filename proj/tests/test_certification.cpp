#include <cmath>
#include <limits>

#include "doctest.h"
#include "oracles.hpp"
#include "support.hpp"

using namespace cman;
using support::pi0;

TEST_SUITE("certification") {

TEST_CASE("check records") {
  const CheckRecord a = make_check("x", 1.0, 2.0, 0.0, "in");
  CHECK(a.ratio == 0.5);
  CHECK(a.pass);
  CHECK(a.inputs_hash == hash_inputs("in"));
  CHECK(make_check("x", 0.0, 0.0, 0.0, "").ratio == 0.0);
  CHECK(std::isinf(make_check("x", 1.0, 0.0, 0.0, "").ratio));
  CHECK_FALSE(make_check("x", 1.1, 1.0, 0.05, "").pass);
  CHECK(make_check("x", 1.1, 1.0, 0.1 + 1e-12, "").pass);
  CertReport r;
  CHECK(r.all_pass());
  r.add(a);
  r.add(make_check("y", 3, 1, 0, ""));
  CHECK_FALSE(r.all_pass());
}

TEST_CASE("FNV-1a reference vectors") {
  CHECK(hash_inputs("") == "cbf29ce484222325");
  CHECK(hash_inputs("a") == "af63dc4c8601ec8c");
  CHECK(hash_inputs("foobar") == "85944171f73967e8");
}

TEST_CASE("Hoelder seminorm") {
  const double h = 1.0 / 16;
  SUBCASE("constant field") {
    const auto f = support::grid(1.0, h, [](double, double) { return 4.0; });
    CHECK(holder_seminorm(f, 0.5).seminorm == 0.0);
  }
  SUBCASE("linear field against all pairs") {
    const auto f = support::grid(1.0, h, [](double x, double y) { return 0.3 * x - 0.2 * y; });
    std::vector<Eigen::Vector2d> pts;
    std::vector<Eigen::VectorXd> vals;
    // every finite node of the lattice takes part, not only the ball
    for (std::size_t k = 0; k < f.node_count(); ++k) {
      pts.push_back(f.node(k));
      vals.push_back(f.value(k));
    }
    const double exact = oracle::holder_all_pairs(pts, vals, 0.5, 2 * h);
    const HolderResult r = holder_seminorm(f, 0.5, 1);
    MESSAGE("Hoelder " << r.seminorm << " oracle " << exact);
    CHECK(r.seminorm <= exact * (1 + 1e-12));
    CHECK(r.seminorm >= 0.98 * exact);
    // linear field: the maximum sits at the largest separation
    CHECK(r.best_separation >= 2.5);
  }
  SUBCASE("errors") {
    GridFunction empty(Vec2::Zero(), 0.1, 0.05, 1);
    for (double& v : empty.raw()) v = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(holder_seminorm(empty, 0.5), Error);
  }
}

TEST_CASE("decay fit") {
  SUBCASE("synthetic power law") {
    const std::vector<double> r = {0.5, 0.25, 0.125, 0.0625};
    std::vector<double> e;
    for (double x : r) e.push_back(0.3 * x * x);
    const DecayFit f = decay_fit(r, e);
    CHECK(std::abs(f.slope - 2) <= 1e-12);
    CHECK(f.slope == doctest::Approx(oracle::loglog_slope(r, e)).epsilon(1e-12));
    CHECK_THROWS_AS(decay_fit({0.5, 0.25, 0.125}, {1, 1, 1}), Error);
    CHECK_THROWS_AS(decay_fit(r, {1, 1, 0, 1}), Error);
  }
  const std::vector<double> radii = {0.5, 0.25, 0.125, 0.0625};
  SUBCASE("harmonic quadratic") {
    const auto T = support::surface(SurfaceKind::harmonic_quadratic, 0.1);
    const DecayFit f = decay_fit(T, base_point(T, Vec2::Zero()), radii);
    MESSAGE("harmonic quadratic slope " << f.slope);
    CHECK(std::abs(f.slope - 2) <= 0.1);
  }
  SUBCASE("Enneper") {
    const auto T = support::surface(SurfaceKind::enneper, 0.1);
    const DecayFit f = decay_fit(T, base_point(T, Vec2::Zero()), radii);
    MESSAGE("Enneper slope " << f.slope);
    CHECK(f.slope >= 1.9);
  }
}

TEST_CASE("one-step decay") {
  SUBCASE("homogeneous excess measure") {
    const BasicDecay d = basic_decay_ratio(std::pow(0.5, 4) * 3.0, 3.0, 2, 0.05);
    CHECK(d.ratio == 1.0 / 16);
    CHECK(d.threshold == doctest::Approx(1.0 / 16 + 0.05));
  }
  ConstantsConfig cfg;
  SUBCASE("harmonic quadratic is sharp") {
    const double eps = 0.02;
    const auto T = support::surface(SurfaceKind::harmonic_quadratic, eps);
    const BasicDecay d = basic_decay_check(T, cfg);
    // e(C_r) = eps^2 pi r^4 for this surface
    CHECK(d.e_one == doctest::Approx(eps * eps * std::numbers::pi).epsilon(0.01));
    CHECK(d.ratio == doctest::Approx(1.0 / 16).epsilon(0.1));
  }
  SUBCASE("Enneper") {
    const auto T = support::surface(SurfaceKind::enneper, 0.1);
    const BasicDecay d = basic_decay_check(T, cfg);
    CHECK(d.ratio <= 1.0 / 16 + cfg.decay_theta);
  }
}

TEST_CASE("tilt identity") {
  const double h = 1.0 / 64;
  SUBCASE("linear graph") {
    const auto f = support::grid(1.0, h, [](double x, double y) { return 0.2 * x - 0.1 * y; });
    const TiltIdentity t = tilt_excess_identity(f, 0.25, 0.5, 0.05);
    CHECK(std::abs(t.lhs) <= 1e-14);
    CHECK(std::abs(t.rhs) <= 1e-14);
  }
  SUBCASE("adding a constant changes nothing") {
    auto g = [](double x, double y) { return 0.1 * x + 0.2 * (x * x - y * y) + 0.05 * x * y * y; };
    const auto f = support::grid(1.0, h, g);
    const auto f2 = support::grid(1.0, h, [&](double x, double y) { return g(x, y) + 0.37; });
    const TiltIdentity a = tilt_excess_identity(f, 0.25, 0.5, 0.05);
    const TiltIdentity b = tilt_excess_identity(f2, 0.25, 0.5, 0.05);
    CHECK(b.gap == doctest::Approx(a.gap).epsilon(1e-9));
    CHECK(b.E == doctest::Approx(a.E).epsilon(1e-9));
  }
  SUBCASE("harmonic quadratic family") {
    std::vector<double> c;
    for (double eps : {0.2, 0.1, 0.05}) {
      const auto f = support::grid(1.0, h, [&](double x, double y) { return eps * (x * x - y * y); });
      c.push_back(tilt_excess_identity(f, 0.25, 0.5, 0.05).constant);
    }
    MESSAGE("gap / E^{1+eta}: " << c[0] << " " << c[1] << " " << c[2]);
    CHECK(c[1] <= 2 * c[0]);
    CHECK(c[2] <= 2 * c[1]);
  }
}

TEST_CASE("L1 distance and scale comparisons") {
  ConstantsConfig cfg;
  const double rho = 1.0 / 16;
  SUBCASE("affine input") {
    const auto T = support::tilted(0.02, -0.01);
    const Interpolant I = interpolate(T, base_point(T, Vec2::Zero()), rho, pi0(), cfg);
    const L1Check c = l1_distance_check(I.f_lip, I.f_bar, I.f_bar.center(), rho, cfg.alpha);
    CHECK(c.lhs <= 1e-10);
  }
  SUBCASE("harmonic quadratic") {
    const auto T = support::surface(SurfaceKind::harmonic_quadratic, 0.05);
    const Interpolant I = interpolate(T, base_point(T, Vec2::Zero()), rho, pi0(), cfg);
    const L1Check c = l1_distance_check(I.f_lip, I.f_bar, I.f_bar.center(), rho, cfg.alpha);
    CHECK(c.lhs <= I.h * I.h * rho * rho);
    const ScaleComparison s = scale_comparison(T, base_point(T, Vec2::Zero()), rho / 2, pi0(), cfg);
    REQUIRE(s.rows.size() == 5);
    for (const auto& row : s.rows) CHECK(row.diff <= std::max(row.floor, 1e-6 * std::pow(rho, -row.order)));
  }
  SUBCASE("flat plane") {
    const auto T = support::surface(SurfaceKind::plane);
    const ScaleComparison s = scale_comparison(T, base_point(T, Vec2::Zero()), rho / 2, pi0(), cfg);
    for (const auto& row : s.rows) CHECK(row.diff == 0.0);
    CHECK(s.constant == 0.0);
  }
  SUBCASE("Enneper: two scales, one constant") {
    const auto T = support::surface(SurfaceKind::enneper, 0.1);
    const Vec p = base_point(T, Vec2::Zero());
    const double a = scale_comparison(T, p, 1.0 / 32, pi0(), cfg).constant;
    const double b = scale_comparison(T, p, 1.0 / 64, pi0(), cfg).constant;
    MESSAGE("Enneper scale constants " << a << " " << b);
    CHECK(b <= 2 * a);
  }
}

TEST_CASE("interpolant comparisons") {
  ConstantsConfig cfg;
  InterpolateOptions lean;
  lean.keep_stages = false;
  const double rho = 1.0 / 32;
  SUBCASE("identical interpolants") {
    const auto T = support::surface(SurfaceKind::enneper, 0.1);
    const Interpolant I = interpolate(T, base_point(T, Vec2::Zero()), rho, pi0(), cfg, lean);
    for (auto mode : {ComparisonMode::cross_plane, ComparisonMode::cross_center}) {
      const auto c = interpolant_comparison(I, I, mode, cfg.alpha);
      for (const auto& row : c.rows) CHECK(row.diff == 0.0);
    }
  }
  SUBCASE("cross plane on the harmonic quadratic") {
    const auto T = support::surface(SurfaceKind::harmonic_quadratic, 0.05);
    std::vector<double> c;
    for (double r : {rho, rho / 2}) {
      const Vec p = base_point(T, Vec2(1.0 / 32, 0));
      const Interpolant a = interpolate(T, p, r, pi0(), cfg, lean);
      const Interpolant b = interpolate(T, p, r, tangent_plane(T, p), cfg, lean);
      const auto cmp = interpolant_comparison(a, b, ComparisonMode::cross_plane, cfg.alpha);
      REQUIRE(cmp.rows.size() == 4);
      c.push_back(cmp.constant);
      // C0 agreement within the budget rho^{3 + alpha}
      CHECK(cmp.rows[0].diff <= std::pow(r, 3 + cfg.alpha));
    }
    MESSAGE("cross-plane constants " << c[0] << " " << c[1]);
    CHECK(c[1] <= 2 * c[0] + 1e-300);
  }
  SUBCASE("cross scale on Enneper") {
    const auto T = support::surface(SurfaceKind::enneper, 0.1);
    // off the origin, where D^3 of the even patch vanishes by symmetry
    const Vec p = base_point(T, Vec2(1.0 / 32, 0));
    std::vector<double> c;
    for (double big : {1.0 / 16, 1.0 / 32}) {
      const Interpolant a = interpolate(T, p, big / 8, pi0(), cfg, lean);
      const Interpolant b = interpolate(T, p, big, pi0(), cfg, lean);
      const auto cmp = interpolant_comparison(a, b, ComparisonMode::cross_scale, cfg.alpha);
      CHECK(cmp.N == 3);
      c.push_back(cmp.center_d3_normalized);
    }
    MESSAGE("cross-scale constants " << c[0] << " " << c[1]);
    CHECK(c[0] > 0);
    CHECK(c[1] > 0);
    CHECK(c[1] <= 2 * c[0]);
  }
}

TEST_CASE("harmonic limit") {
  ConstantsConfig cfg;
  SUBCASE("flat family is degenerate") {
    std::vector<SampledCurrent> fam(3, support::surface(SurfaceKind::plane, 0.0, 65));
    CHECK_THROWS_AS(harmonic_limit_check(fam, cfg), Error);
  }
  SUBCASE("harmonic quadratic family is its own limit") {
    std::vector<SampledCurrent> fam;
    for (double eps : {0.2, 0.1, 0.05}) fam.push_back(support::surface(SurfaceKind::harmonic_quadratic, eps));
    const HarmonicLimit h = harmonic_limit_check(fam, cfg);
    const double step = fam[0].base.h();
    for (double d : h.distance) CHECK(d <= step * step);
  }
  SUBCASE("Enneper blow-ups converge") {
    std::vector<SampledCurrent> fam;
    for (double eps : {0.2, 0.1, 0.05}) fam.push_back(support::surface(SurfaceKind::enneper, eps));
    const HarmonicLimit h = harmonic_limit_check(fam, cfg);
    MESSAGE("distances " << h.distance[0] << " " << h.distance[1] << " " << h.distance[2]);
    CHECK(h.nonincreasing);
    CHECK(h.halved);
    CHECK(h.energy.back() <= h.energy_bound);
    CHECK(h.pass);
  }
}

TEST_CASE("third derivative field") {
  const PartitionOfUnity pou(dyadic_grid(7, 6, 2));
  Mat coeffs = Mat::Zero(10, 1);
  coeffs(6, 0) = 1.0;  // one cubic monomial
  const Polynomial P(2, 3, Vec::Zero(2), 1.0, coeffs);
  std::vector<std::shared_ptr<const Interpolant>> g;
  for (std::size_t i = 0; i < pou.grid().size(); ++i) {
    auto I = std::make_shared<Interpolant>();
    I->model = P;
    I->g = GridFunction(Vec2::Zero(), 0.1, 0.05, 1);
    g.push_back(I);
  }
  const BlendedSurface H = blend(g, pou, 8);
  const GridFunction F = third_derivative_field(H);
  CHECK(F.n() == 4);
  double jet[15];
  P.planar_jet(Vec2::Zero(), 0, 3, jet);
  const double norm = planar_tensor_norm(jet, 3);
  CHECK(norm > 0);
  for (std::size_t k = 0; k < F.node_count(); ++k) CHECK(F.value(k).norm() == doctest::Approx(norm).epsilon(1e-9));
}

}  // TEST_SUITE
