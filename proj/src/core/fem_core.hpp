#pragma once

// Structured Q4 grid: numbering, connectivity, shape-function kernels, the
// element stiffness matrix and the triplet index patterns for K and G.
//
// Conventions (0-based throughout the library):
//   * nodes are numbered column-major, top to bottom: node(row, col) = col*(nely+1)+row
//   * elements likewise: element(row, col) = col*nely + row
//   * DOF 2n is the x-displacement of node n, DOF 2n+1 its y-displacement (y up)
//   * local element nodes run counter-clockwise from the bottom-left corner

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace bucktop {

using Index = std::int32_t;

using ShapeGrad = Eigen::Matrix<double, 2, 4>;
using ElementCoords = Eigen::Matrix<double, 4, 2>;
using StrainOperator = Eigen::Matrix<double, 3, 8>;
using DeformationOperator = Eigen::Matrix<double, 4, 8>;
using ElementMatrix = Eigen::Matrix<double, 8, 8>;
using ElementVector = Eigen::Matrix<double, 8, 1>;
using Elasticity = Eigen::Matrix3d;

inline constexpr int kDofsPerElement = 8;
inline constexpr int kLowerEntries = 36;
inline constexpr int kStressEntries = 10;

/// Local (row, col) pairs of the lower half of an 8x8 element matrix,
/// enumerated column by column: column j contributes rows j..7.
struct LowerPattern {
  std::array<int, kLowerEntries> row{};
  std::array<int, kLowerEntries> col{};
};
const LowerPattern& lower_pattern();

/// Positions inside lower_pattern() of the ten odd-odd entries that carry the
/// independent stress-stiffness coefficients: {0,2,4,6,15,17,19,26,28,33}.
inline constexpr std::array<int, kStressEntries> kStressPositions = {0, 2, 4, 6, 15,
                                                                     17, 19, 26, 28, 33};

/// Node pairs (i, k) of the ten coefficients z_ik, i >= k, in storage order.
inline constexpr std::array<std::array<int, 2>, kStressEntries> kCoefficientNodes = {{
    {0, 0}, {1, 0}, {2, 0}, {3, 0}, {1, 1}, {2, 1}, {3, 1}, {2, 2}, {3, 2}, {3, 3},
}};

/// Columns of the coefficient array holding off-diagonal z_ik (doubled in
/// quadratic forms).
inline constexpr std::array<int, 6> kOffDiagonalCoefficients = {1, 2, 3, 5, 6, 8};

struct GaussRule {
  std::array<double, 2> points;
  std::array<double, 2> weights;

  static GaussRule two_point();
};

class GridModel {
 public:
  GridModel(int nelx, int nely, double lx);

  int nelx() const { return nelx_; }
  int nely() const { return nely_; }
  double lx() const { return lx_; }
  double ly() const { return ly_; }
  double element_width() const { return lx_ / nelx_; }
  double element_height() const { return ly_ / nely_; }

  Index num_elements() const { return static_cast<Index>(nelx_) * nely_; }
  Index num_nodes() const { return static_cast<Index>(nelx_ + 1) * (nely_ + 1); }
  Index num_dofs() const { return 2 * num_nodes(); }

  Index node(int row, int col) const { return static_cast<Index>(col) * (nely_ + 1) + row; }
  Index element(int row, int col) const { return static_cast<Index>(col) * nely_ + row; }

  const std::array<Index, 8>& dofs(Index e) const { return connectivity_[e]; }
  const std::vector<std::array<Index, 8>>& connectivity() const { return connectivity_; }

  /// Physical coordinates of the four local nodes of any element, relative to
  /// its bottom-left corner. The grid is uniform so this is element independent.
  ElementCoords element_coords() const;

  // Boundary conditions, loads and passive sets. Each setter validates its input.
  void set_fixed(std::vector<Index> fixed_dofs);
  void set_load(std::vector<double> load);
  void set_passive(std::vector<Index> solid, std::vector<Index> void_elements);

  const std::vector<Index>& fixed() const { return fixed_; }
  const std::vector<Index>& free() const { return free_; }
  /// Full DOF -> position in free(), or -1 for fixed DOFs.
  const std::vector<Index>& free_map() const { return free_map_; }
  const std::vector<double>& load() const { return load_; }
  const std::vector<Index>& passive_solid() const { return passive_solid_; }
  const std::vector<Index>& passive_void() const { return passive_void_; }
  const std::vector<Index>& active() const { return active_; }

 private:
  int nelx_;
  int nely_;
  double lx_;
  double ly_;
  std::vector<std::array<Index, 8>> connectivity_;
  std::vector<Index> fixed_;
  std::vector<Index> free_;
  std::vector<Index> free_map_;
  std::vector<double> load_;
  std::vector<Index> passive_solid_;
  std::vector<Index> passive_void_;
  std::vector<Index> active_;
};

/// Triplet index patterns for the global assembly, element-major
/// (entry e*36+t for K, e*10+t for G). Every pair is sorted so row >= col.
struct AssemblyIndices {
  std::vector<Index> k_rows;
  std::vector<Index> k_cols;
  std::vector<Index> g_rows;
  std::vector<Index> g_cols;
};

AssemblyIndices build_indices(std::span<const std::array<Index, 8>> connectivity);

/// d(N1..N4)/d(xi, zeta) for the bilinear quad.
ShapeGrad shape_grad(double xi, double zeta);

/// J^{-1} * shape_grad, with J = shape_grad * coords. Throws InvalidArgument
/// for a degenerate element.
ShapeGrad physical_grad(const ElementCoords& coords, double xi, double zeta);

double jacobian_det(const ElementCoords& coords, double xi, double zeta);

/// Small-strain operator B0 (rows: eps_x, eps_y, gamma_xy).
StrainOperator strain_operator(const ShapeGrad& grad);

/// Displacement-gradient operator B1 (rows: du/dx, du/dy, dv/dx, dv/dy).
DeformationOperator deformation_operator(const ShapeGrad& grad);

/// Plane-stress elasticity matrix for unit Young's modulus.
Elasticity plane_stress_elasticity(double nu);

/// Element stiffness for unit modulus and unit thickness, element of size
/// (2*half_width) x (2*half_height), 2x2 Gauss quadrature.
ElementMatrix element_stiffness(double half_width, double half_height, double nu);

/// The 36 lower-half entries of an element matrix in lower_pattern() order.
std::array<double, kLowerEntries> lower_entries(const ElementMatrix& m);

}  // namespace bucktop
