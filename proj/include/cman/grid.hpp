#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace cman {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Vec2 = Eigen::Vector2d;

/// Samples of a map B_r(center) subset R^2 -> R^n on the square lattice
/// center + h * (i - half, j - half), 0 <= i,j <= 2 half. The lattice covers
/// the closed ball; values outside the ball may be NaN (undefined).
class GridFunction {
 public:
  GridFunction() = default;
  GridFunction(Vec2 center, double radius, double h, int n);

  /// Same lattice, new radius (values copied, nodes beyond the new ball kept).
  GridFunction with_radius(double radius) const;

  const Vec2& center() const { return center_; }
  double radius() const { return radius_; }
  double h() const { return h_; }
  int half() const { return half_; }
  int side() const { return 2 * half_ + 1; }
  int n() const { return n_; }
  std::size_t node_count() const { return static_cast<std::size_t>(side()) * side(); }

  std::size_t index(int i, int j) const { return static_cast<std::size_t>(j) * side() + i; }
  Vec2 node(int i, int j) const {
    return center_ + h_ * Vec2(i - half_, j - half_);
  }
  Vec2 node(std::size_t idx) const { return node(int(idx % side()), int(idx / side())); }

  bool in_ball(int i, int j, double slack = 1e-12) const;
  bool in_lattice(int i, int j) const { return i >= 0 && j >= 0 && i < side() && j < side(); }

  double& at(int i, int j, int c) { return values_[index(i, j) * n_ + c]; }
  double at(int i, int j, int c) const { return values_[index(i, j) * n_ + c]; }
  Eigen::Map<Vec> value(std::size_t idx) { return {values_.data() + idx * n_, n_}; }
  Eigen::Map<const Vec> value(std::size_t idx) const { return {values_.data() + idx * n_, n_}; }
  std::span<double> raw() { return values_; }
  std::span<const double> raw() const { return values_; }

  /// Fills every lattice node (inside and outside the ball) from fn.
  void fill(const std::function<Vec(const Vec2&)>& fn);

  /// Nearest lattice index to a point (may fall outside the lattice).
  std::array<int, 2> nearest(const Vec2& x) const;

  /// Piecewise bicubic (Catmull-Rom) interpolation; falls back to bilinear
  /// near the lattice edge. Returns false if x is outside the lattice or hits
  /// undefined values.
  bool interpolate(const Vec2& x, Vec& out) const;

  /// Centered second-order difference of d^{a}_x d^{b}_y of component c at a
  /// node (a + b <= 4). Stencils shift to one-sided at the lattice edge.
  double partial(int i, int j, int c, int a, int b) const;

  /// n x 2 Jacobian at a node by the stencils of partial().
  Mat jacobian(int i, int j) const;

  /// Largest |f(x)-f(y)|/|x-y| over node pairs inside the ball at lattice
  /// distance <= reach * h. Undefined nodes are skipped.
  double lipschitz_local(int reach = 4, std::span<const std::uint8_t> mask = {}) const;

  bool all_finite_in_ball() const;

 private:
  Vec2 center_ = Vec2::Zero();
  double radius_ = 0.0;
  double h_ = 1.0;
  int half_ = 0;
  int n_ = 1;
  std::vector<double> values_;
};

/// Nodal quadrature weights of a region given by a level function
/// (negative inside) on a GridFunction lattice. Cells are h x h squares
/// centred at the nodes; a cell whose centre is farther than `cut_band`
/// from the zero level counts fully in or out, cut cells get the fraction of
/// their sub-samples lying inside.
struct QuadratureOptions {
  int subsamples = 16;
  double level_lipschitz = 1.0;
};

std::vector<double> region_weights(const GridFunction& grid,
                                   const std::function<double(const Vec2&)>& level,
                                   const QuadratureOptions& opts = {});

/// Weights for the disk B_r(q) in the lattice plane.
std::vector<double> disk_weights(const GridFunction& grid, const Vec2& q, double r,
                                 const QuadratureOptions& opts = {});

double sum_weights(std::span<const double> w);

}  // namespace cman
