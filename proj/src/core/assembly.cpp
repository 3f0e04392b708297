#include "assembly.hpp"

#include "errors.hpp"

#include <cmath>

namespace bucktop {

double Interpolation::ek(double x) const { return emin + (e0 - emin) * std::pow(x, penal_k); }

double Interpolation::dek(double x) const {
  return penal_k * (e0 - emin) * std::pow(x, penal_k - 1.0);
}

double Interpolation::eg(double x) const { return e0 * std::pow(x, penal_g); }

double Interpolation::deg(double x) const { return penal_g * e0 * std::pow(x, penal_g - 1.0); }

namespace {

CoefficientOperator coefficient_operator(const ShapeGrad& grad) {
  CoefficientOperator op;
  for (int s = 0; s < kStressEntries; ++s) {
    const int i = kCoefficientNodes[s][0];
    const int k = kCoefficientNodes[s][1];
    const double ai = grad(0, i), bi = grad(1, i);
    const double ak = grad(0, k), bk = grad(1, k);
    op(s, 0) = ak * ai;
    op(s, 1) = bk * bi;
    op(s, 2) = bk * ai + ak * bi;
  }
  return op;
}

}  // namespace

ElementOperators make_element_operators(const GridModel& grid, double nu) {
  ElementOperators ops;
  ops.k0 = element_stiffness(0.5 * grid.element_width(), 0.5 * grid.element_height(), nu);
  ops.k0_lower = lower_entries(ops.k0);
  ops.c = plane_stress_elasticity(nu);

  const ElementCoords xe = grid.element_coords();
  ops.b0_centroid = strain_operator(physical_grad(xe, 0.0, 0.0));

  const GaussRule rule = GaussRule::two_point();
  ops.dzdu.setZero();
  int g = 0;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j, ++g) {
      const double xi = rule.points[i];
      const double zeta = rule.points[j];
      const ShapeGrad grad = physical_grad(xe, xi, zeta);
      const double w = rule.weights[i] * rule.weights[j] * jacobian_det(xe, xi, zeta);
      ops.b0_gauss[g] = strain_operator(grad);
      ops.coeff_gauss[g] = w * coefficient_operator(grad);
      ops.dzdu += ops.coeff_gauss[g] * ops.c * ops.b0_gauss[g];
    }
  }
  return ops;
}

Eigen::MatrixXd gather(const GridModel& grid, std::span<const double> u) {
  if (static_cast<Index>(u.size()) != grid.num_dofs())
    throw InvalidArgument("displacement vector length does not match the grid");
  const Index m = grid.num_elements();
  Eigen::MatrixXd ue(m, kDofsPerElement);
  for (Index e = 0; e < m; ++e) {
    const auto& dofs = grid.dofs(e);
    for (int k = 0; k < kDofsPerElement; ++k) ue(e, k) = u[dofs[k]];
  }
  return ue;
}

Eigen::MatrixXd centroid_stress(const GridModel& grid, const ElementOperators& ops,
                                std::span<const double> u) {
  const Eigen::Matrix<double, 3, 8> cb = ops.c * ops.b0_centroid;
  return gather(grid, u) * cb.transpose();
}

Eigen::MatrixXd gauss_point_stress(const GridModel& grid, const ElementOperators& ops,
                                   std::span<const double> u) {
  Eigen::MatrixXd s;
  gauss_point_stress(grid, ops, u, s);
  return s;
}

void gauss_point_stress(const GridModel& grid, const ElementOperators& ops,
                        std::span<const double> u, Eigen::MatrixXd& out) {
  if (static_cast<Index>(u.size()) != grid.num_dofs())
    throw InvalidArgument("displacement vector length does not match the grid");
  Eigen::Matrix<double, 12, 8> cb;
  for (int g = 0; g < 4; ++g) cb.middleRows<3>(3 * g) = ops.c * ops.b0_gauss[g];
  const Index m = grid.num_elements();
  out.resize(m, 12);
  Eigen::Matrix<double, 8, 1> ue;
  for (Index e = 0; e < m; ++e) {
    const auto& dofs = grid.dofs(e);
    for (int k = 0; k < kDofsPerElement; ++k) ue(k) = u[dofs[k]];
    out.row(e).noalias() = (cb * ue).transpose();
  }
}

Eigen::MatrixXd z_from_stress(const ElementOperators& ops, const Eigen::MatrixXd& gp_stress) {
  Eigen::MatrixXd z;
  z_from_stress(ops, gp_stress, z);
  return z;
}

void z_from_stress(const ElementOperators& ops, const Eigen::MatrixXd& gp_stress,
                   Eigen::MatrixXd& out) {
  if (gp_stress.cols() != 12) throw InvalidArgument("Gauss-point stress array must have 12 columns");
  Eigen::Matrix<double, kStressEntries, 12> w;
  for (int g = 0; g < 4; ++g) w.middleCols<3>(3 * g) = ops.coeff_gauss[g];
  out.resize(gp_stress.rows(), kStressEntries);
  out.noalias() = gp_stress * w.transpose();
}

Eigen::MatrixXd compute_z(const GridModel& grid, const ElementOperators& ops,
                          std::span<const double> u) {
  return z_from_stress(ops, gauss_point_stress(grid, ops, u));
}

ElementMatrix expand_z_row(const Eigen::Ref<const Eigen::RowVectorXd>& z) {
  if (z.size() != kStressEntries) throw InvalidArgument("a Z row has 10 entries");
  ElementMatrix g = ElementMatrix::Zero();
  for (int s = 0; s < kStressEntries; ++s) {
    const int i = kCoefficientNodes[s][0];
    const int k = kCoefficientNodes[s][1];
    for (int d = 0; d < 2; ++d) {
      g(2 * i + d, 2 * k + d) = z(s);
      g(2 * k + d, 2 * i + d) = z(s);
    }
  }
  return g;
}

Assembler::Assembler(const GridModel& grid, double nu)
    : grid_(&grid),
      ops_(make_element_operators(grid, nu)),
      indices_(build_indices(grid.connectivity())) {
  const std::size_t n = indices_.g_rows.size();
  g2_rows_.resize(2 * n);
  g2_cols_.resize(2 * n);
  for (std::size_t t = 0; t < n; ++t) {
    g2_rows_[t] = indices_.g_rows[t];
    g2_cols_[t] = indices_.g_cols[t];
    g2_rows_[n + t] = indices_.g_rows[t] + 1;
    g2_cols_[n + t] = indices_.g_cols[t] + 1;
  }
}

std::vector<double> Assembler::k_values(std::span<const double> x_phys,
                                        const Interpolation& interp) const {
  const Index m = grid_->num_elements();
  if (static_cast<Index>(x_phys.size()) != m) throw InvalidArgument("density field size mismatch");
  std::vector<double> v(static_cast<std::size_t>(m) * kLowerEntries);
  for (Index e = 0; e < m; ++e) {
    const double s = interp.ek(x_phys[e]);
    double* out = v.data() + static_cast<std::size_t>(e) * kLowerEntries;
    for (int t = 0; t < kLowerEntries; ++t) out[t] = s * ops_.k0_lower[t];
  }
  return v;
}

std::vector<double> Assembler::g_values(const Eigen::MatrixXd& z, std::span<const double> x_phys,
                                        const Interpolation& interp) const {
  const Index m = grid_->num_elements();
  if (static_cast<Index>(x_phys.size()) != m || z.rows() != m || z.cols() != kStressEntries)
    throw InvalidArgument("Z array or density field size mismatch");
  const std::size_t n = static_cast<std::size_t>(m) * kStressEntries;
  std::vector<double> v(2 * n);
  for (Index e = 0; e < m; ++e) {
    const double s = interp.eg(x_phys[e]);
    for (int k = 0; k < kStressEntries; ++k) {
      const double val = s * z(e, k);
      v[static_cast<std::size_t>(e) * kStressEntries + k] = val;
      v[n + static_cast<std::size_t>(e) * kStressEntries + k] = val;
    }
  }
  return v;
}

CscMatrix Assembler::assemble_k(std::span<const double> x_phys, const Interpolation& interp,
                                bool free_only) const {
  const std::vector<double> v = k_values(x_phys, interp);
  if (free_only)
    return assemble_lower(indices_.k_rows, indices_.k_cols, v,
                          static_cast<Index>(grid_->free().size()), grid_->free_map());
  return assemble_lower(indices_.k_rows, indices_.k_cols, v, grid_->num_dofs());
}

CscMatrix Assembler::assemble_g(const Eigen::MatrixXd& z, std::span<const double> x_phys,
                                const Interpolation& interp, bool free_only) const {
  const std::vector<double> v = g_values(z, x_phys, interp);
  if (free_only)
    return assemble_lower(g2_rows_, g2_cols_, v, static_cast<Index>(grid_->free().size()),
                          grid_->free_map());
  return assemble_lower(g2_rows_, g2_cols_, v, grid_->num_dofs());
}

}  // namespace bucktop
