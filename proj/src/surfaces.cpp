#include "cman/surfaces.hpp"

#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <random>

#include "cman/config.hpp"

namespace cman {
namespace {

using Eval = std::function<bool(const Vec2&, Vec&, Mat&)>;

class AnalyticSource final : public GraphSource {
 public:
  AnalyticSource(int n, double radius, Eval fn, std::string desc)
      : n_(n), radius_(radius), fn_(std::move(fn)), desc_(std::move(desc)) {}
  int n() const override { return n_; }
  bool eval(const Vec2& x, Vec& value, Mat& jac) const override {
    if (x.norm() > radius_ * (1 + 1e-9)) return false;
    value.resize(n_);
    jac.resize(n_, 2);
    return fn_(x, value, jac);
  }
  std::string describe() const override { return desc_; }

 private:
  int n_;
  double radius_;
  Eval fn_;
  std::string desc_;
};

// Enneper's surface (u - u^3/3 + u v^2, v - v^3/3 + v u^2, u^2 - v^2) as a
// graph y -> F(y) near the origin.
bool enneper_graph(const Vec2& y, double& F, Vec2& DF) {
  double u = y.x(), v = y.y();
  for (int it = 0; it < 60; ++it) {
    const double p = u - u * u * u / 3 + u * v * v - y.x();
    const double q = v - v * v * v / 3 + v * u * u - y.y();
    Eigen::Matrix2d J;
    J << 1 - u * u + v * v, 2 * u * v, 2 * u * v, 1 + u * u - v * v;
    if (std::abs(J.determinant()) < 1e-8) return false;
    const Vec2 step = J.inverse() * Vec2(p, q);
    u -= step.x();
    v -= step.y();
    if (step.norm() < 1e-15 * std::max(1.0, std::hypot(u, v))) {
      Eigen::Matrix2d Jf;
      Jf << 1 - u * u + v * v, 2 * u * v, 2 * u * v, 1 + u * u - v * v;
      F = u * u - v * v;
      DF = (Eigen::RowVector2d(2 * u, -2 * v) * Jf.inverse()).transpose();
      return true;
    }
  }
  return false;
}

Eval clean_eval(const SurfaceSpec& s, int& n, std::string& desc) {
  const double e = s.epsilon;
  n = 1;
  switch (s.kind) {
    case SurfaceKind::plane:
      desc = "plane";
      return [](const Vec2&, Vec& v, Mat& J) {
        v.setZero();
        J.setZero();
        return true;
      };
    case SurfaceKind::tilted: {
      n = static_cast<int>(s.tilt.rows());
      desc = "tilted";
      const Mat L = s.tilt;
      return [L](const Vec2& x, Vec& v, Mat& J) {
        v = L * x;
        J = L;
        return true;
      };
    }
    case SurfaceKind::harmonic_quadratic:
      desc = "harmonic_quadratic";
      return [e](const Vec2& x, Vec& v, Mat& J) {
        v(0) = e * (x.x() * x.x() - x.y() * x.y());
        J(0, 0) = 2 * e * x.x();
        J(0, 1) = -2 * e * x.y();
        return true;
      };
    case SurfaceKind::harmonic_poly: {
      desc = "harmonic_poly";
      const auto c = s.harmonic_coeffs;
      return [c](const Vec2& x, Vec& v, Mat& J) {
        const std::complex<double> z(x.x(), x.y());
        std::complex<double> zk(1, 0), dzk(0, 0);  // z^k and k z^{k-1}
        double f = 0, fx = 0, fy = 0;
        for (std::size_t k = 0; k < c.size(); ++k) {
          if (k > 0) {
            dzk = static_cast<double>(k) * zk;
            zk *= z;
          }
          f += c[k][0] * zk.real() + c[k][1] * zk.imag();
          fx += c[k][0] * dzk.real() + c[k][1] * dzk.imag();
          fy += -c[k][0] * dzk.imag() + c[k][1] * dzk.real();
        }
        v(0) = f;
        J(0, 0) = fx;
        J(0, 1) = fy;
        return true;
      };
    }
    case SurfaceKind::enneper:
      desc = "enneper";
      return [e](const Vec2& x, Vec& v, Mat& J) {
        double F;
        Vec2 DF;
        if (!enneper_graph(e * x, F, DF)) return false;
        v(0) = F / e;
        J.row(0) = DF.transpose();
        return true;
      };
    case SurfaceKind::scherk:
      desc = "scherk";
      return [e](const Vec2& x, Vec& v, Mat& J) {
        const double a = e * x.x(), b = e * x.y();
        const double lim = std::numbers::pi / 2;
        if (std::abs(a) >= lim || std::abs(b) >= lim) return false;
        v(0) = std::log(std::cos(b) / std::cos(a)) / e;
        J(0, 0) = std::tan(a);
        J(0, 1) = -std::tan(b);
        return true;
      };
    case SurfaceKind::spiked:
      break;
  }
  throw Error(ErrorKind::input, "surface: spiked is not a clean kind");
}

}  // namespace

std::string to_string(SurfaceKind k) {
  switch (k) {
    case SurfaceKind::plane: return "plane";
    case SurfaceKind::tilted: return "tilted";
    case SurfaceKind::harmonic_quadratic: return "harmonic_quadratic";
    case SurfaceKind::harmonic_poly: return "harmonic_poly";
    case SurfaceKind::enneper: return "enneper";
    case SurfaceKind::scherk: return "scherk";
    case SurfaceKind::spiked: return "spiked";
  }
  return "?";
}

SurfaceKind surface_kind_from_string(const std::string& s) {
  for (auto k : {SurfaceKind::plane, SurfaceKind::tilted, SurfaceKind::harmonic_quadratic, SurfaceKind::harmonic_poly,
                 SurfaceKind::enneper, SurfaceKind::scherk, SurfaceKind::spiked}) {
    if (to_string(k) == s) return k;
  }
  throw Error(ErrorKind::input, "unknown surface kind '" + s + "'");
}

void SurfaceSpec::validate() const {
  if (!(epsilon >= 0)) throw Error(ErrorKind::input, "surface: epsilon must be >= 0");
  if (resolution < 33) throw Error(ErrorKind::input, "surface: resolution must be >= 33 nodes per side");
  if (resolution % 2 == 0) throw Error(ErrorKind::input, "surface: resolution must be odd");
  if (!(radius > 0)) throw Error(ErrorKind::input, "surface: radius must be > 0");
  const SurfaceKind k = kind == SurfaceKind::spiked ? base : kind;
  if (k == SurfaceKind::spiked) throw Error(ErrorKind::input, "surface: spiked base must be a clean kind");
  if ((k == SurfaceKind::enneper || k == SurfaceKind::scherk) && !(epsilon > 0)) {
    throw Error(ErrorKind::input, "surface: enneper/scherk need epsilon > 0");
  }
  if (k == SurfaceKind::tilted && tilt.cols() != 2) throw Error(ErrorKind::input, "surface: tilt must be n x 2");
  if (kind == SurfaceKind::spiked && !(defect_fraction >= 0 && defect_fraction <= 0.05)) {
    throw Error(ErrorKind::input, "surface: defect_fraction must lie in [0, 0.05]");
  }
}

std::shared_ptr<const GraphSource> surface_source(const SurfaceSpec& spec) {
  spec.validate();
  SurfaceSpec clean = spec;
  if (spec.kind == SurfaceKind::spiked) clean.kind = spec.base;
  int n;
  std::string desc;
  Eval fn = clean_eval(clean, n, desc);
  return std::make_shared<AnalyticSource>(n, spec.sampled_radius(), std::move(fn), desc);
}

SampledCurrent generate_surface(const SurfaceSpec& spec) {
  auto src = surface_source(spec);
  const int n = src->n();
  SampledCurrent T;
  T.frame = Frame::identity(2, n);
  T.source = src;
  T.base = GridFunction(Vec2::Zero(), spec.sampled_radius(), spec.h(), n);
  GridFunction& g = T.base;
  const SurfaceKind k = spec.kind == SurfaceKind::spiked ? spec.base : spec.kind;
  const bool bounded_slope = k == SurfaceKind::enneper || k == SurfaceKind::scherk;
  Vec v;
  Mat J;
  std::vector<std::size_t> inside;
  for (int j = 0; j < g.side(); ++j) {
    for (int i = 0; i < g.side(); ++i) {
      if (!g.in_ball(i, j)) continue;
      if (!src->eval(g.node(i, j), v, J)) {
        throw Error(ErrorKind::precondition, "generate_surface: requested patch is not a graph on the domain");
      }
      if (bounded_slope && J.norm() > 0.5) {
        throw Error(ErrorKind::precondition, "generate_surface: patch slope exceeds 1/2 on the domain");
      }
      g.value(g.index(i, j)) = v;
      if (g.node(i, j).norm() <= spec.radius) inside.push_back(g.index(i, j));
    }
  }

  if (spec.kind == SurfaceKind::spiked) {
    const auto count = static_cast<std::size_t>(std::llround(spec.defect_fraction * double(inside.size())));
    const double mass = spec.defect_mass > 0 ? spec.defect_mass : 2 * spec.h() * spec.h();
    std::mt19937_64 rng(spec.seed);
    // Partial Fisher-Yates on raw engine output (portable across standard libraries).
    for (std::size_t t = 0; t < count; ++t) {
      const std::size_t pick = t + static_cast<std::size_t>(rng() % (inside.size() - t));
      std::swap(inside[t], inside[pick]);
      const double phi = 2 * std::numbers::pi * double(rng() >> 11) * 0x1.0p-53;
      DefectSample d;
      d.position = Vec::Zero(2 + n);
      d.position.head<2>() = g.node(inside[t]);
      d.position.tail(n) = g.value(inside[t]);
      d.position(2) += 0.1;
      d.tangent = Mat::Zero(2, 2 + n);
      d.tangent(0, 0) = std::cos(phi);
      d.tangent(0, 1) = std::sin(phi);
      d.tangent(1, 2) = 1.0;
      d.mass = mass;
      T.defects.push_back(std::move(d));
    }
  }
  T.refresh_mask();
  T.validate();
  return T;
}

}  // namespace cman
