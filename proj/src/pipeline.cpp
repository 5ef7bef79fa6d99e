#include "cman/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "cman/excess.hpp"

namespace cman {
namespace {

double uniform01(std::mt19937_64& rng) { return double(rng() >> 11) * 0x1.0p-53; }

std::string describe(const RunConfig& cfg) {
  std::ostringstream os;
  os.precision(17);
  os << to_string(cfg.surface.kind) << " eps=" << cfg.surface.epsilon << " res=" << cfg.surface.resolution
     << " R=" << cfg.surface.radius << " base=" << to_string(cfg.surface.base)
     << " frac=" << cfg.surface.defect_fraction << " seed=" << cfg.surface.seed << " k=" << cfg.k_min << ".."
     << cfg.k_max << " plane=" << to_string(cfg.plane_mode) << " rseed=" << cfg.seed;
  return os.str();
}

// Fitted constant at the finer scale against twice the coarse one: the
// estimates are upper bounds, so a constant that shrinks is stable.
CheckRecord bound_stability(const std::string& name, double coarse, double fine, const std::string& inputs) {
  CheckRecord r = make_check(name, fine, 2 * coarse, 0.0, inputs);
  r.fitted_constant = std::max(coarse, fine);
  std::ostringstream os;
  os.precision(6);
  os << "coarse=" << coarse << " fine=" << fine;
  r.detail = os.str();
  return r;
}

// max/min <= 2 over a family of norms (all zero counts as stable).
CheckRecord spread_stability(const std::string& name, const std::vector<double>& v, const std::string& inputs) {
  const double hi = *std::max_element(v.begin(), v.end());
  const double lo = *std::min_element(v.begin(), v.end());
  CheckRecord r = make_check(name, hi, 2 * lo, 0.0, inputs);
  r.fitted_constant = hi;
  std::ostringstream os;
  os.precision(6);
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "values=") << v[i];
  r.detail = os.str();
  return r;
}

CheckRecord degenerate(const std::string& name, const std::string& inputs, const std::string& why) {
  CheckRecord r = make_check(name, 0.0, 0.0, 0.0, inputs);
  r.detail = "degenerate input: " + why;
  return r;
}

Frame choose_plane(const SampledCurrent& T, const Vec& p, double rho, PlaneMode mode, const ConstantsConfig& cfg) {
  switch (mode) {
    case PlaneMode::reference:
      return Frame::identity(T.m(), T.n());
    case PlaneMode::tangent:
      return tangent_plane(T, p);
    case PlaneMode::optimal: {
      const double h = rho / cfg.nodes_per_rho;
      const Vec pf = T.frame.to_frame(p);
      const SampledCurrent chart = chart_over_plane(T, T.frame, pf.head<2>(), 8 * rho + 3 * h, h);
      const ExcessReport rep = spherical_excess(chart, Region::ball(pf, 8 * rho));
      return plane_to_reference(rep.plane, chart.frame);
    }
  }
  return Frame::identity(T.m(), T.n());
}

double sup_error(const BlendedSurface& H, const SampledCurrent& T) {
  const GraphEval f = graph_evaluator(T);
  double err = 0.0;
  Vec v;
  Mat J;
  for (std::size_t k = 0; k < H.h.node_count(); ++k) {
    if (!f(H.h.node(k), v, J)) throw Error(ErrorKind::precondition, "blend: Q leaves the surface domain");
    err = std::max(err, (H.h.value(k) - v).norm());
  }
  return err;
}

double c3_norm(const BlendedSurface& H) {
  double sup[4] = {0, 0, 0, 0};
  const int n = H.h.n();
  for (std::size_t k = 0; k < H.jet.node_count(); ++k) {
    for (int c = 0; c < n; ++c) {
      const double* jet = H.jet.raw().data() + k * H.jet.n() + c * jet_size(4);
      for (int l = 0; l <= 3; ++l) sup[l] = std::max(sup[l], planar_tensor_norm(jet, l));
    }
  }
  return sup[0] + sup[1] + sup[2] + sup[3];
}

CheckRecord partition_check(const PartitionOfUnity& pou, std::uint64_t seed, const std::string& inputs) {
  const DyadicGrid& G = pou.grid();
  std::mt19937_64 rng(seed);
  double sum_err = 0.0, der_err = 0.0;
  double psi[15], acc[15];
  for (int t = 0; t < 10000; ++t) {
    const Vec2 q(G.half_side * (2 * uniform01(rng) - 1), G.half_side * (2 * uniform01(rng) - 1));
    std::fill(acc, acc + 15, 0.0);
    const int i = G.nearest(Vec(q));
    for (int j : G.adjacency[i]) {
      pou.jet(j, q, psi, false);
      for (int s = 0; s < 15; ++s) acc[s] += psi[s];
    }
    sum_err = std::max(sum_err, std::abs(acc[0] - 1.0));
    for (int s = 1; s < 15; ++s) der_err = std::max(der_err, std::abs(acc[s]));
  }
  // Both tolerances folded into one ratio.
  CheckRecord r = make_check("partition_identity", std::max(sum_err / 1e-12, der_err / 1e-9), 1.0, 0.0, inputs);
  std::ostringstream os;
  os.precision(3);
  os << "k=" << G.k << " sum_err=" << sum_err << " deriv_err=" << der_err;
  r.detail = os.str();
  return r;
}

}  // namespace

std::string to_string(PlaneMode m) {
  switch (m) {
    case PlaneMode::reference: return "reference";
    case PlaneMode::tangent: return "tangent";
    case PlaneMode::optimal: return "optimal";
  }
  return "?";
}

PlaneMode plane_mode_from_string(const std::string& s) {
  for (auto m : {PlaneMode::reference, PlaneMode::tangent, PlaneMode::optimal})
    if (to_string(m) == s) return m;
  throw Error(ErrorKind::input, "unknown plane mode '" + s + "'");
}

const std::vector<std::string>& known_checks() {
  static const std::vector<std::string> names = {
      "hypothesis_H",      "partition_identity", "blend_c0_monotone", "blend_c3_stability",
      "blend_holder_stability", "decay_fit",     "basic_decay",       "tilt_identity",
      "l1_distance",       "scale_comparison",   "cross_plane",       "cross_center",
      "cross_scale",       "harmonic_limit"};
  return names;
}

void RunConfig::validate() const {
  surface.validate();
  constants.validate();
  if (k_min < constants.k0 || k_max > constants.k0 + 4 || k_min > k_max) {
    throw Error(ErrorKind::input, "run config: k range must lie within [k0, k0 + 4]");
  }
  if (k_min <= constants.n0) throw Error(ErrorKind::input, "run config: k must exceed n0");
  for (const auto& c : checks) {
    if (std::find(known_checks().begin(), known_checks().end(), c) == known_checks().end()) {
      throw Error(ErrorKind::input, "run config: unknown check '" + c + "'");
    }
  }
  if (blend_samples < 4) throw Error(ErrorKind::input, "run config: blend_samples must be >= 4");
}

bool RunConfig::wants(const std::string& check) const {
  return checks.empty() || std::find(checks.begin(), checks.end(), check) != checks.end();
}

std::vector<std::shared_ptr<const Interpolant>> level_interpolants(const SampledCurrent& T, const DyadicGrid& grid,
                                                                   PlaneMode mode, const ConstantsConfig& cfg) {
  const double rho = cfg.interp_radius_factor * std::ldexp(1.0, -grid.k);
  InterpolateOptions opts;
  opts.keep_stages = false;
  std::vector<std::shared_ptr<const Interpolant>> out(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    try {
      const Vec2 c(grid.centers[i][0], grid.centers[i][1]);
      const Vec p = base_point(T, c);
      const Frame pi = choose_plane(T, p, rho, mode, cfg);
      out[i] = std::make_shared<Interpolant>(interpolate(T, p, rho, pi, cfg, opts));
    } catch (const Error& e) {
      throw e.with_context("k=" + std::to_string(grid.k) + ", cube " + std::to_string(i));
    }
  }
  return out;
}

PipelineResult run_pipeline(const RunConfig& cfg) {
  cfg.validate();
  const ConstantsConfig& K = cfg.constants;
  const std::string inputs = describe(cfg);
  PipelineResult res;
  res.report.metadata = {{"inputs", inputs}, {"inputs_hash", hash_inputs(inputs)}};

  const SampledCurrent T = generate_surface(cfg.surface);
  const double R = cfg.surface.radius;

  // Hypothesis (H), measured on the domain ball of R^{m+n}.
  {
    const RegionSamples B = RegionSamples::ball(T, Vec::Zero(2 + T.n()), R);
    const double bound = std::numbers::pi * R * R * (1 + K.eps1);
    CheckRecord r = make_check("hypothesis_H", B.mass(), bound, 0.0, inputs);
    r.detail = "mass of the domain ball against omega_m R^m (1 + eps1)";
    if (!r.pass) throw Error(ErrorKind::precondition, "hypothesis (H) fails: ||T||(B_R) exceeds omega_m R^m (1 + eps1)");
    if (cfg.wants("hypothesis_H")) res.report.add(r);
  }

  const bool want_levels = cfg.wants("partition_identity") || cfg.wants("blend_c0_monotone") ||
                           cfg.wants("blend_c3_stability") || cfg.wants("blend_holder_stability");
  if (want_levels) {
    for (int k = cfg.k_min; k <= cfg.k_max; ++k) {
      const DyadicGrid grid = dyadic_grid(k, K.n0, 2);
      const PartitionOfUnity pou = bump_partition(grid);
      if (cfg.wants("partition_identity")) res.report.add(partition_check(pou, cfg.seed + k, inputs));
      LevelResult L;
      L.k = k;
      auto interps = level_interpolants(T, grid, cfg.plane_mode, K);
      for (const auto& g : interps)
        L.max_admissibility_ratio = std::max(L.max_admissibility_ratio, g->admissibility_lhs / g->admissibility_rhs);
      L.H = blend(std::move(interps), pou, cfg.blend_samples);
      L.c0_error = sup_error(L.H, T);
      L.c3_norm = c3_norm(L.H);
      L.holder = holder_seminorm(third_derivative_field(L.H), K.alpha, cfg.seed).seminorm;
      res.levels.push_back(std::move(L));
    }
    std::vector<double> c0, c3, hol;
    for (const auto& L : res.levels) {
      c0.push_back(L.c0_error);
      c3.push_back(L.c3_norm);
      hol.push_back(L.holder);
    }
    if (cfg.wants("blend_c0_monotone")) {
      // Largest ratio between consecutive levels; nonincreasing means <= 1.
      double worst = 0.0;
      for (std::size_t i = 1; i < c0.size(); ++i) {
        if (c0[i] > 0) worst = std::max(worst, c0[i - 1] > 0 ? c0[i] / c0[i - 1] : HUGE_VAL);
      }
      CheckRecord r = make_check("blend_c0_monotone", worst, 1.0, 1e-12, inputs);
      std::ostringstream os;
      os.precision(6);
      for (std::size_t i = 0; i < c0.size(); ++i) os << (i ? "," : "c0=") << c0[i];
      r.detail = os.str();
      res.report.add(r);
    }
    if (cfg.wants("blend_c3_stability")) res.report.add(spread_stability("blend_c3_stability", c3, inputs));
    if (cfg.wants("blend_holder_stability")) res.report.add(spread_stability("blend_holder_stability", hol, inputs));
  }

  const Vec p0 = base_point(T, Vec2::Zero());
  const double rho = K.interp_radius_factor * std::ldexp(1.0, -cfg.k_min);

  if (cfg.wants("decay_fit")) {
    const std::vector<double> radii = {0.5, 0.25, 0.125, 0.0625};
    try {
      const DecayFit fit = decay_fit(T, p0, radii);
      CheckRecord r = make_check("decay_fit", 2 - 2 * K.delta, fit.slope, 0.0, inputs);
      r.fitted_exponent = fit.slope;
      res.report.add(r);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::precondition) throw;
      res.report.add(degenerate("decay_fit", inputs, e.what()));
    }
  }
  if (cfg.wants("basic_decay")) {
    try {
      const BasicDecay d = basic_decay_check(T, K);
      res.report.add(make_check("basic_decay", d.ratio, d.threshold, 0.0, inputs));
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::precondition) throw;
      res.report.add(degenerate("basic_decay", inputs, e.what()));
    }
  }
  if (cfg.wants("tilt_identity")) {
    const TiltIdentity a = tilt_excess_identity(T.base, 0.25, 0.5, K.eta);
    const TiltIdentity b = tilt_excess_identity(T.base, 0.125, 0.25, K.eta);
    res.report.add(bound_stability("tilt_identity", a.constant, b.constant, inputs));
  }
  const Frame pi0 = Frame::identity(T.m(), T.n());
  if (cfg.wants("l1_distance")) {
    double c[2];
    for (int s = 0; s < 2; ++s) {
      const double r = std::ldexp(rho, -s);
      const Interpolant I = interpolate(T, p0, r, pi0, K);
      c[s] = l1_distance_check(I.f_lip, I.f_bar, I.f_bar.center(), r, K.alpha).constant;
    }
    res.report.add(bound_stability("l1_distance", c[0], c[1], inputs));
  }
  if (cfg.wants("scale_comparison")) {
    const double r = rho / 2;
    const double c0 = scale_comparison(T, p0, r, pi0, K).constant;
    const double c1 = scale_comparison(T, p0, r / 2, pi0, K).constant;
    res.report.add(bound_stability("scale_comparison", c0, c1, inputs));
  }
  InterpolateOptions lean;
  lean.keep_stages = false;
  if (cfg.wants("cross_plane")) {
    double c[2];
    const Vec p = base_point(T, Vec2(1.0 / 32, 0.0));
    const Frame tp = tangent_plane(T, p);
    for (int s = 0; s < 2; ++s) {
      const double r = std::ldexp(rho / 2, -s);
      const Interpolant a = interpolate(T, p, r, pi0, K, lean);
      const Interpolant b = interpolate(T, p, r, tp, K, lean);
      c[s] = interpolant_comparison(a, b, ComparisonMode::cross_plane, K.alpha).constant;
    }
    res.report.add(bound_stability("cross_plane", c[0], c[1], inputs));
  }
  if (cfg.wants("cross_center")) {
    double c[2];
    for (int s = 0; s < 2; ++s) {
      const double r = std::ldexp(rho, -s);
      const double step = r / K.interp_radius_factor;  // neighbouring cube centres
      const Interpolant a = interpolate(T, p0, r, pi0, K, lean);
      const Interpolant b = interpolate(T, base_point(T, Vec2(step, 0.0)), r, pi0, K, lean);
      c[s] = interpolant_comparison(a, b, ComparisonMode::cross_center, K.alpha).constant;
    }
    res.report.add(bound_stability("cross_center", c[0], c[1], inputs));
  }
  if (cfg.wants("cross_scale")) {
    double c[2];
    // off the origin: the test surfaces are even there, so D^3 would vanish by symmetry
    const Vec p = base_point(T, Vec2(1.0 / 32, 0.0));
    for (int s = 0; s < 2; ++s) {
      const double big = std::ldexp(rho, -s);
      const Interpolant a = interpolate(T, p, big / 8, pi0, K, lean);
      const Interpolant b = interpolate(T, p, big, pi0, K, lean);
      c[s] = interpolant_comparison(a, b, ComparisonMode::cross_scale, K.alpha).center_d3_normalized;
    }
    res.report.add(bound_stability("cross_scale", c[0], c[1], inputs));
  }
  if (cfg.wants("harmonic_limit")) {
    const SurfaceKind kind = cfg.surface.kind;
    const bool scalable = (kind == SurfaceKind::harmonic_quadratic || kind == SurfaceKind::enneper ||
                           kind == SurfaceKind::scherk) && cfg.surface.epsilon > 0;
    if (!scalable) {
      res.report.add(degenerate("harmonic_limit", inputs, "surface has no amplitude family"));
    } else {
      std::vector<SampledCurrent> fam;
      for (int l = 0; l < 3; ++l) {
        SurfaceSpec s = cfg.surface;
        s.epsilon = std::ldexp(cfg.surface.epsilon, -l);
        fam.push_back(generate_surface(s));
      }
      const HarmonicLimit h = harmonic_limit_check(fam, K);
      CheckRecord r = make_check("harmonic_limit", h.energy.back(), h.energy_bound, 0.0, inputs);
      r.pass = r.pass && h.nonincreasing && h.halved;
      std::ostringstream os;
      os.precision(6);
      for (std::size_t i = 0; i < h.distance.size(); ++i) os << (i ? "," : "distances=") << h.distance[i];
      r.detail = os.str();
      res.report.add(r);
    }
  }
  return res;
}

}  // namespace cman
