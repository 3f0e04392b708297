#pragma once

// Response values and their derivatives with respect to the physical densities.

#include "assembly.hpp"
#include "fem_core.hpp"
#include "solvers.hpp"

#include <span>
#include <vector>

namespace bucktop {

struct ResponseGradient {
  double value = 0.0;
  std::vector<double> grad;  // d/dx^, zero on passive elements
};

/// c = F^T u and dc/dx^_e = -E_K'(x^_e) u_e^T K0 u_e on active elements.
ResponseGradient compliance_and_grad(const GridModel& grid, const ElementOperators& ops,
                                     const Interpolation& interp, std::span<const double> x_phys,
                                     std::span<const double> u);

/// f = mean(x^) over all elements, df/dx^_e = 1/m on active elements.
ResponseGradient volume_and_grad(const GridModel& grid, std::span<const double> x_phys);

/// Coefficient operator with the rows of off-diagonal coefficients doubled,
/// so that phi_e^T G0_e phi_e = sum_k (doubled Z_e)_k p_k.
ZOperator doubled_dzdu(const ZOperator& dzdu);

/// Eigenvector pair products p (m x 10):
/// p_k = phi(x_i) phi(x_j) + phi(y_i) phi(y_j) for the node pair (i, j) of coefficient k.
Eigen::MatrixXd pair_products(const GridModel& grid, std::span<const double> phi);

/// Adjoint load phi^T (dG/du) phi over all DOFs.
std::vector<double> adjoint_load(const GridModel& grid, const ElementOperators& ops,
                                 const Interpolation& interp, std::span<const double> x_phys,
                                 std::span<const double> phi);

/// dmu_i/dx^ for the positive modes of `solution` (m x num_positive).
/// Adjoint systems for all modes are solved as one block.
Eigen::MatrixXd mu_sensitivities(const GridModel& grid, const ElementOperators& ops,
                                 const Interpolation& interp, std::span<const double> x_phys,
                                 std::span<const double> u, const Eigen::MatrixXd& z,
                                 const BucklingSolution& solution,
                                 const FactorizedOperator& factor);

/// Shifted Kreisselmeier-Steinhauser aggregate: max + ln(sum exp(rho (v - max))) / rho.
double ks_value(std::span<const double> values, double rho);

/// Softmax weights of the aggregate (non-negative, sum to one).
std::vector<double> ks_weights(std::span<const double> values, double rho);

/// Gradient of the aggregate given per-value gradients stored as columns.
std::vector<double> ks_grad(std::span<const double> values, const Eigen::MatrixXd& grads, double rho);

}  // namespace bucktop
