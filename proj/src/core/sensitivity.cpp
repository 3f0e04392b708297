#include "sensitivity.hpp"

#include "errors.hpp"

#include <algorithm>
#include <cmath>

namespace bucktop {

namespace {

void check_sizes(const GridModel& grid, std::span<const double> x_phys, std::span<const double> u) {
  if (static_cast<Index>(x_phys.size()) != grid.num_elements())
    throw InvalidArgument("density field size mismatch");
  if (static_cast<Index>(u.size()) != grid.num_dofs())
    throw InvalidArgument("DOF vector size mismatch");
}

ElementVector element_vector(const GridModel& grid, std::span<const double> u, Index e) {
  ElementVector v;
  const auto& dofs = grid.dofs(e);
  for (int k = 0; k < kDofsPerElement; ++k) v(k) = u[dofs[k]];
  return v;
}

}  // namespace

ResponseGradient compliance_and_grad(const GridModel& grid, const ElementOperators& ops,
                                     const Interpolation& interp, std::span<const double> x_phys,
                                     std::span<const double> u) {
  check_sizes(grid, x_phys, u);
  ResponseGradient r;
  const auto& f = grid.load();
  for (Index d = 0; d < grid.num_dofs(); ++d) r.value += f[d] * u[d];
  r.grad.assign(grid.num_elements(), 0.0);
  for (Index e : grid.active()) {
    const ElementVector ue = element_vector(grid, u, e);
    r.grad[e] = -interp.dek(x_phys[e]) * ue.dot(ops.k0 * ue);
  }
  return r;
}

ResponseGradient volume_and_grad(const GridModel& grid, std::span<const double> x_phys) {
  if (static_cast<Index>(x_phys.size()) != grid.num_elements())
    throw InvalidArgument("density field size mismatch");
  const double m = static_cast<double>(grid.num_elements());
  ResponseGradient r;
  for (double v : x_phys) r.value += v;
  r.value /= m;
  r.grad.assign(grid.num_elements(), 0.0);
  for (Index e : grid.active()) r.grad[e] = 1.0 / m;
  return r;
}

ZOperator doubled_dzdu(const ZOperator& dzdu) {
  ZOperator d = dzdu;
  for (int k : kOffDiagonalCoefficients) d.row(k) *= 2.0;
  return d;
}

Eigen::MatrixXd pair_products(const GridModel& grid, std::span<const double> phi) {
  if (static_cast<Index>(phi.size()) != grid.num_dofs())
    throw InvalidArgument("mode vector length does not match the grid");
  Eigen::MatrixXd p(grid.num_elements(), kStressEntries);
  for (Index e = 0; e < grid.num_elements(); ++e) {
    const auto& dofs = grid.dofs(e);
    for (int s = 0; s < kStressEntries; ++s) {
      const int i = kCoefficientNodes[s][0];
      const int j = kCoefficientNodes[s][1];
      p(e, s) = phi[dofs[2 * i]] * phi[dofs[2 * j]] + phi[dofs[2 * i + 1]] * phi[dofs[2 * j + 1]];
    }
  }
  return p;
}

std::vector<double> adjoint_load(const GridModel& grid, const ElementOperators& ops,
                                 const Interpolation& interp, std::span<const double> x_phys,
                                 std::span<const double> phi) {
  check_sizes(grid, x_phys, phi);
  const ZOperator dz = doubled_dzdu(ops.dzdu);
  const Eigen::MatrixXd p = pair_products(grid, phi);
  std::vector<double> load(grid.num_dofs(), 0.0);
  for (Index e = 0; e < grid.num_elements(); ++e) {
    const ElementVector fe = interp.eg(x_phys[e]) * (dz.transpose() * p.row(e).transpose());
    const auto& dofs = grid.dofs(e);
    for (int k = 0; k < kDofsPerElement; ++k) load[dofs[k]] += fe(k);
  }
  return load;
}

Eigen::MatrixXd mu_sensitivities(const GridModel& grid, const ElementOperators& ops,
                                 const Interpolation& interp, std::span<const double> x_phys,
                                 std::span<const double> u, const Eigen::MatrixXd& z,
                                 const BucklingSolution& solution,
                                 const FactorizedOperator& factor) {
  check_sizes(grid, x_phys, u);
  const Index m = grid.num_elements();
  const int q = solution.num_positive;
  if (z.rows() != m || z.cols() != kStressEntries) throw InvalidArgument("Z array size mismatch");

  Eigen::MatrixXd z2 = z;
  for (int k : kOffDiagonalCoefficients) z2.col(k) *= 2.0;
  const ZOperator dz = doubled_dzdu(ops.dzdu);

  Eigen::MatrixXd first(m, q), second(m, q);
  Eigen::MatrixXd loads = Eigen::MatrixXd::Zero(grid.num_dofs(), q);
  for (int i = 0; i < q; ++i) {
    const std::span<const double> phi(solution.phi.col(i).data(), grid.num_dofs());
    const Eigen::MatrixXd p = pair_products(grid, phi);
    for (Index e = 0; e < m; ++e) {
      const ElementVector pe = element_vector(grid, phi, e);
      second(e, i) = interp.dek(x_phys[e]) * pe.dot(ops.k0 * pe);
      first(e, i) = interp.deg(x_phys[e]) * z2.row(e).dot(p.row(e));
      const ElementVector fe = interp.eg(x_phys[e]) * (dz.transpose() * p.row(e).transpose());
      const auto& dofs = grid.dofs(e);
      for (int k = 0; k < kDofsPerElement; ++k) loads(dofs[k], i) += fe(k);
    }
  }

  const Eigen::MatrixXd w = solve_adjoint(factor, grid, loads);

  Eigen::MatrixXd dmu = Eigen::MatrixXd::Zero(m, q);
  std::vector<char> active(m, 0);
  for (Index e : grid.active()) active[e] = 1;
  for (int i = 0; i < q; ++i) {
    const std::span<const double> wi(w.col(i).data(), grid.num_dofs());
    const double mu = solution.mu[i];
    for (Index e = 0; e < m; ++e) {
      if (!active[e]) continue;
      const ElementVector we = element_vector(grid, wi, e);
      const ElementVector ue = element_vector(grid, u, e);
      const double third = interp.dek(x_phys[e]) * we.dot(ops.k0 * ue);
      dmu(e, i) = -(first(e, i) + mu * second(e, i) - third);
    }
  }
  return dmu;
}

double ks_value(std::span<const double> values, double rho) {
  if (values.empty()) throw InvalidArgument("KS aggregate of an empty set");
  if (!(rho > 0.0)) throw InvalidArgument("KS parameter must be positive");
  const double top = *std::max_element(values.begin(), values.end());
  double sum = 0.0;
  for (double v : values) sum += std::exp(rho * (v - top));
  return top + std::log(sum) / rho;
}

std::vector<double> ks_weights(std::span<const double> values, double rho) {
  if (values.empty()) throw InvalidArgument("KS aggregate of an empty set");
  const double top = *std::max_element(values.begin(), values.end());
  std::vector<double> w(values.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    w[i] = std::exp(rho * (values[i] - top));
    sum += w[i];
  }
  for (double& v : w) v /= sum;
  return w;
}

std::vector<double> ks_grad(std::span<const double> values, const Eigen::MatrixXd& grads, double rho) {
  if (grads.cols() != static_cast<Index>(values.size()))
    throw InvalidArgument("one gradient column per aggregated value is required");
  const std::vector<double> w = ks_weights(values, rho);
  std::vector<double> g(grads.rows(), 0.0);
  for (std::size_t i = 0; i < w.size(); ++i)
    for (Index e = 0; e < grads.rows(); ++e) g[e] += w[i] * grads(e, static_cast<Index>(i));
  return g;
}

}  // namespace bucktop
