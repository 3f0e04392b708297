#pragma once

// Global K and stress-stiffness G assembly.
//
// G is never formed element by element: each element's contribution is fully
// described by ten coefficients z_ik = sx*a_k*a_i + sy*b_k*b_i + txy*(b_k*a_i + a_k*b_i),
// integrated over the element, stored as one row of an m x 10 array Z.
// The x-x block of G_e holds these coefficients and the y-y block repeats
// them, so the lower half of G needs two scatters of the same 10 values.
//
// A hexahedral extension would carry 36 coefficients per element with the
// additional terms sz*c_k*c_i + txz*(a_k*c_i + c_k*a_i) + tyz*(b_k*c_i + c_k*b_i).

#include "fem_core.hpp"
#include "sparse.hpp"

#include <array>
#include <span>
#include <vector>

namespace bucktop {

/// SIMP interpolations for stiffness (E_K) and stress stiffness (E_G).
struct Interpolation {
  double e0 = 1.0;
  double emin = 1e-6;
  double penal_k = 3.0;
  double penal_g = 3.0;

  double ek(double x) const;
  double dek(double x) const;
  double eg(double x) const;
  double deg(double x) const;
};

using CoefficientOperator = Eigen::Matrix<double, kStressEntries, 3>;
using ZOperator = Eigen::Matrix<double, kStressEntries, kDofsPerElement>;

/// Element-level operators shared by every element of a uniform grid.
struct ElementOperators {
  ElementMatrix k0;
  std::array<double, kLowerEntries> k0_lower{};
  Elasticity c;
  StrainOperator b0_centroid;
  std::array<StrainOperator, 4> b0_gauss;
  /// Rows: the ten coefficients; columns: weights of (sx, sy, txy), already
  /// multiplied by the quadrature weight and det J of the Gauss point.
  std::array<CoefficientOperator, 4> coeff_gauss;
  /// Z_e = dzdu * u_e.
  ZOperator dzdu;
};

ElementOperators make_element_operators(const GridModel& grid, double nu);

/// Stacked element displacements: m x 8.
Eigen::MatrixXd gather(const GridModel& grid, std::span<const double> u);

/// Unit-modulus stress at the element centroid, m x 3 (sx, sy, txy).
Eigen::MatrixXd centroid_stress(const GridModel& grid, const ElementOperators& ops,
                                std::span<const double> u);

/// Unit-modulus stress at the four Gauss points: block g holds columns 3g..3g+2.
Eigen::MatrixXd gauss_point_stress(const GridModel& grid, const ElementOperators& ops,
                                   std::span<const double> u);
/// Same, writing into out (resized only when the shape differs).
void gauss_point_stress(const GridModel& grid, const ElementOperators& ops,
                        std::span<const double> u, Eigen::MatrixXd& out);

/// Z (m x 10) from Gauss-point stresses.
Eigen::MatrixXd z_from_stress(const ElementOperators& ops, const Eigen::MatrixXd& gp_stress);
void z_from_stress(const ElementOperators& ops, const Eigen::MatrixXd& gp_stress,
                   Eigen::MatrixXd& out);

/// Z (m x 10) from the displacement field.
Eigen::MatrixXd compute_z(const GridModel& grid, const ElementOperators& ops,
                          std::span<const double> u);

/// Dense 8x8 element matrix described by one Z row.
ElementMatrix expand_z_row(const Eigen::Ref<const Eigen::RowVectorXd>& z);

/// Owns the assembly indices of a grid and turns element data into
/// lower-triangular global matrices. The grid must outlive the assembler.
class Assembler {
 public:
  Assembler(const GridModel& grid, double nu);

  /// K restricted to free DOFs (or all DOFs when free_only is false).
  CscMatrix assemble_k(std::span<const double> x_phys, const Interpolation& interp,
                       bool free_only = true) const;

  /// G restricted to free DOFs (or all DOFs when free_only is false).
  CscMatrix assemble_g(const Eigen::MatrixXd& z, std::span<const double> x_phys,
                       const Interpolation& interp, bool free_only = true) const;

  /// Triplet values only; exposed for the scaling benchmark.
  std::vector<double> k_values(std::span<const double> x_phys, const Interpolation& interp) const;
  std::vector<double> g_values(const Eigen::MatrixXd& z, std::span<const double> x_phys,
                               const Interpolation& interp) const;

  const GridModel& grid() const { return *grid_; }
  const ElementOperators& ops() const { return ops_; }
  const AssemblyIndices& indices() const { return indices_; }

 private:
  const GridModel* grid_;
  ElementOperators ops_;
  AssemblyIndices indices_;
  std::vector<Index> g2_rows_;
  std::vector<Index> g2_cols_;
};

}  // namespace bucktop
