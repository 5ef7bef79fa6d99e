#pragma once

#include <array>
#include <memory>
#include <vector>

#include "cman/interpolation.hpp"

namespace cman {

/// Cubes of side 2 * 2^{-k} centred at c_i = 2^{-k} i that meet
/// Q = [-2^{-n0}, 2^{-n0}]^m.
struct DyadicGrid {
  int m = 2;
  int k = 7;
  int n0 = 6;
  double spacing = 0.0;  // 2^{-k}
  double half_side = 0.0;  // 2^{-n0}
  int reach = 0;  // |i_j| <= reach
  std::vector<std::vector<int>> index;
  std::vector<Vec> centers;
  /// Cubes j with |i - j|_inf <= 1 (including i itself).
  std::vector<std::vector<int>> adjacency;

  std::size_t size() const { return centers.size(); }
  /// Position in the cube list, -1 if absent.
  int find(const std::vector<int>& i) const;
  /// Cube whose centre is nearest to q (ties to the larger index).
  int nearest(const Vec& q) const;
};

DyadicGrid dyadic_grid(int k, int n0, int m = 2);

/// Truncated Taylor polynomial of a one-variable function: c[j] = f^{(j)}/j!.
struct Taylor4 {
  std::array<double, 5> c{};
};

/// psi_i(q) = beta(2^k (q - c_i)) with beta a tensor product of the 1-d
/// profile b(t) / sum_j b(t - j), b(t) = exp(-1/(1 - (t/w)^2)) on |t| < w.
/// With w = 3/4 the profile equals 1 on [-1/4, 1/4] and psi_i psi_j = 0 for
/// cubes that are not adjacent.
class PartitionOfUnity {
 public:
  PartitionOfUnity() = default;
  explicit PartitionOfUnity(DyadicGrid grid, double width = 0.75);

  const DyadicGrid& grid() const { return grid_; }
  double width() const { return width_; }

  /// Profile derivatives beta^{(j)}(t), j = 0..4.
  std::array<double, 5> profile(double t) const;
  double psi(int cube, const Vec& q) const;
  /// Planar partials of psi_cube at q up to order 4, in physical units when
  /// `physical`, otherwise in the rescaled variable 2^k (q - c_i).
  void jet(int cube, const Vec2& q, double* out, bool physical = true) const;
  /// sup |D^l psi| (Frobenius) of the unscaled tensor-product profile,
  /// sampled on a 1/400 lattice of its support, l = 0..4.
  std::array<double, 5> profile_sup_norms() const;

 private:
  DyadicGrid grid_;
  double width_ = 0.75;
};

PartitionOfUnity bump_partition(const DyadicGrid& grid);

/// h_k = sum_i psi_i g_i sampled on a lattice over Q with derivative fields
/// assembled by Leibniz products.
struct BlendedSurface {
  int k = 0;
  PartitionOfUnity pou;
  std::vector<std::shared_ptr<const Interpolant>> interpolants;  // aligned with the cube list
  GridFunction h;    // values on the lattice covering Q
  GridFunction jet;  // n * jet_size(4) partials per node: component c at c * 15 + jet_index
};

/// samples_per_half_side nodes between the centre and each face of Q.
BlendedSurface blend(std::vector<std::shared_ptr<const Interpolant>> interpolants,
                     const PartitionOfUnity& pou, int samples_per_half_side = 75);

/// n x jet_size(order) partials of h_k at q in Q.
Mat derivatives_at(const BlendedSurface& H, const Vec2& q, int order = 4);

/// Full derivative tensor norm from planar partials: sqrt(sum_b C(l,b) d_{l-b,b}^2).
double planar_tensor_norm(const double* jet, int order);

}  // namespace cman
