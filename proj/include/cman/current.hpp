#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cman/frame.hpp"
#include "cman/grid.hpp"

namespace cman {

/// Exact graph x -> f(x) over the plane of a current's frame. Sampled
/// currents built from a known surface keep one so that local charts at fine
/// scales can be resampled without interpolation error.
class GraphSource {
 public:
  virtual ~GraphSource() = default;
  virtual int n() const = 0;
  /// Writes f(x) and Df(x) (n x 2); returns false outside the domain.
  virtual bool eval(const Vec2& x, Vec& value, Mat& jac) const = 0;
  virtual std::string describe() const = 0;
};

struct DefectSample {
  Vec position;  // point of R^{m+n}, in the current's frame coordinates
  Mat tangent;   // m x (m+n) orthonormal rows (unit simple m-vector)
  double mass = 0.0;
};

/// Graph samples plus explicit defect samples standing for extra sheets.
struct SampledCurrent {
  Frame frame;                        // coordinates x' = A x of the samples
  GridFunction base;                  // graph over the frame's plane
  std::vector<std::uint8_t> base_mask;  // 0 where a defect column sits
  std::vector<DefectSample> defects;
  std::shared_ptr<const GraphSource> source;  // optional exact graph

  int m() const { return frame.m(); }
  int n() const { return frame.n(); }

  /// Throws Error(input) on non-finite base values, non-positive defect
  /// masses, non-unit defect tangents or shape mismatches.
  void validate() const;

  /// Rebuilds base_mask from the defect list (nearest node of each defect).
  void refresh_mask();
};

/// A ball of R^{m+n} or a cylinder B_r(q) x pi^perp over a frame's plane.
struct Region {
  enum class Kind { ball, cylinder };
  Kind kind = Kind::ball;
  Vec center;     // point of R^{m+n} (ball) or base point q in R^m (cylinder)
  double radius = 1.0;
  Frame frame;    // plane of the cylinder (reference coordinates)

  static Region ball(Vec center, double radius);
  static Region cylinder(Vec q, double radius, Frame frame);
};

/// Graph evaluation callback: value and n x 2 Jacobian at x, false when x is
/// outside the domain.
using GraphEval = std::function<bool(const Vec2&, Vec&, Mat&)>;

/// Evaluator of a current's graph: exact source when present, otherwise
/// bicubic interpolation of the base samples with a difference Jacobian.
GraphEval graph_evaluator(const SampledCurrent& T);
GraphEval grid_evaluator(const GridFunction& g);

/// For z in the target plane, solves P(R (x, f(x))) = z for x and returns
/// (x, Q(R (x, f(x)))). R maps source coordinates to target coordinates.
struct GraphInversion {
  Vec2 source_point;
  Vec value;
  int iterations = 0;
};
std::optional<GraphInversion> invert_graph_map(const GraphEval& f, const Mat& R, const Vec2& z,
                                               const Vec2& initial, double tol = 1e-12,
                                               int max_iter = 50);

/// The current seen from `plane`: a graph over the disk B_radius(q) of that
/// plane (q in the plane's coordinates), sampled with spacing h, with the
/// defects lying in the cylinder carried over. Throws when the chart leaves
/// the sampled domain.
SampledCurrent chart_over_plane(const SampledCurrent& T, const Frame& plane, const Vec2& q,
                                double radius, double h);

}  // namespace cman
