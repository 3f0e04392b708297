#include "fem_core.hpp"

#include "errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace bucktop {

const LowerPattern& lower_pattern() {
  static const LowerPattern pattern = [] {
    LowerPattern p;
    int t = 0;
    for (int j = 0; j < 8; ++j) {
      for (int i = j; i < 8; ++i, ++t) {
        p.row[t] = i;
        p.col[t] = j;
      }
    }
    return p;
  }();
  return pattern;
}

GaussRule GaussRule::two_point() {
  const double g = 1.0 / std::sqrt(3.0);
  return GaussRule{{-g, g}, {1.0, 1.0}};
}

GridModel::GridModel(int nelx, int nely, double lx)
    : nelx_(nelx), nely_(nely), lx_(lx), ly_(lx * nely / static_cast<double>(nelx)) {
  if (nelx < 1 || nely < 1) throw InvalidArgument("grid needs at least one element per side");
  if (!(lx > 0.0)) throw InvalidArgument("domain length must be positive");

  connectivity_.resize(num_elements());
  for (int c = 0; c < nelx_; ++c) {
    for (int r = 0; r < nely_; ++r) {
      const Index tl = node(r, c);
      const Index bl = tl + 1;
      const Index br = bl + (nely_ + 1);
      const Index tr = tl + (nely_ + 1);
      const std::array<Index, 4> nodes = {bl, br, tr, tl};
      auto& e = connectivity_[element(r, c)];
      for (int a = 0; a < 4; ++a) {
        e[2 * a] = 2 * nodes[a];
        e[2 * a + 1] = 2 * nodes[a] + 1;
      }
    }
  }

  load_.assign(num_dofs(), 0.0);
  set_fixed({});
  set_passive({}, {});
}

ElementCoords GridModel::element_coords() const {
  const double w = element_width();
  const double h = element_height();
  ElementCoords xe;
  xe << 0.0, 0.0, w, 0.0, w, h, 0.0, h;
  return xe;
}

void GridModel::set_fixed(std::vector<Index> fixed_dofs) {
  std::sort(fixed_dofs.begin(), fixed_dofs.end());
  fixed_dofs.erase(std::unique(fixed_dofs.begin(), fixed_dofs.end()), fixed_dofs.end());
  if (!fixed_dofs.empty() && (fixed_dofs.front() < 0 || fixed_dofs.back() >= num_dofs()))
    throw InvalidArgument("fixed DOF index out of range");

  fixed_ = std::move(fixed_dofs);
  free_.clear();
  free_map_.assign(num_dofs(), -1);
  std::size_t k = 0;
  for (Index d = 0; d < num_dofs(); ++d) {
    if (k < fixed_.size() && fixed_[k] == d) {
      ++k;
      continue;
    }
    free_map_[d] = static_cast<Index>(free_.size());
    free_.push_back(d);
  }
}

void GridModel::set_load(std::vector<double> load) {
  if (static_cast<Index>(load.size()) != num_dofs())
    throw InvalidArgument("load vector length " + std::to_string(load.size()) +
                          " does not match DOF count " + std::to_string(num_dofs()));
  load_ = std::move(load);
}

void GridModel::set_passive(std::vector<Index> solid, std::vector<Index> void_elements) {
  auto normalize = [this](std::vector<Index>& v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    if (!v.empty() && (v.front() < 0 || v.back() >= num_elements()))
      throw InvalidArgument("passive element index out of range");
  };
  normalize(solid);
  normalize(void_elements);

  std::vector<Index> overlap;
  std::set_intersection(solid.begin(), solid.end(), void_elements.begin(), void_elements.end(),
                        std::back_inserter(overlap));
  if (!overlap.empty())
    throw InvalidArgument("element " + std::to_string(overlap.front()) +
                          " is both passive solid and passive void");

  passive_solid_ = std::move(solid);
  passive_void_ = std::move(void_elements);

  std::vector<char> passive(num_elements(), 0);
  for (Index e : passive_solid_) passive[e] = 1;
  for (Index e : passive_void_) passive[e] = 1;
  active_.clear();
  for (Index e = 0; e < num_elements(); ++e)
    if (!passive[e]) active_.push_back(e);
}

AssemblyIndices build_indices(std::span<const std::array<Index, 8>> connectivity) {
  const auto& pat = lower_pattern();
  const std::size_t m = connectivity.size();
  AssemblyIndices idx;
  idx.k_rows.resize(m * kLowerEntries);
  idx.k_cols.resize(m * kLowerEntries);
  idx.g_rows.resize(m * kStressEntries);
  idx.g_cols.resize(m * kStressEntries);
  for (std::size_t e = 0; e < m; ++e) {
    const auto& dofs = connectivity[e];
    for (int t = 0; t < kLowerEntries; ++t) {
      const Index a = dofs[pat.row[t]];
      const Index b = dofs[pat.col[t]];
      idx.k_rows[e * kLowerEntries + t] = std::max(a, b);
      idx.k_cols[e * kLowerEntries + t] = std::min(a, b);
    }
    for (int s = 0; s < kStressEntries; ++s) {
      const std::size_t t = e * kLowerEntries + kStressPositions[s];
      idx.g_rows[e * kStressEntries + s] = idx.k_rows[t];
      idx.g_cols[e * kStressEntries + s] = idx.k_cols[t];
    }
  }
  return idx;
}

ShapeGrad shape_grad(double xi, double zeta) {
  ShapeGrad d;
  d << zeta - 1.0, 1.0 - zeta, 1.0 + zeta, -1.0 - zeta,
       xi - 1.0, -1.0 - xi, 1.0 + xi, 1.0 - xi;
  return 0.25 * d;
}

double jacobian_det(const ElementCoords& coords, double xi, double zeta) {
  return (shape_grad(xi, zeta) * coords).determinant();
}

ShapeGrad physical_grad(const ElementCoords& coords, double xi, double zeta) {
  const ShapeGrad dn = shape_grad(xi, zeta);
  const Eigen::Matrix2d jac = dn * coords;
  const double det = jac.determinant();
  const double scale = jac.cwiseAbs().maxCoeff();
  if (!(std::abs(det) > 1e-14 * scale * scale))
    throw InvalidArgument("degenerate element: singular Jacobian");
  return jac.inverse() * dn;
}

StrainOperator strain_operator(const ShapeGrad& grad) {
  StrainOperator b = StrainOperator::Zero();
  for (int i = 0; i < 4; ++i) {
    b(0, 2 * i) = grad(0, i);
    b(1, 2 * i + 1) = grad(1, i);
    b(2, 2 * i) = grad(1, i);
    b(2, 2 * i + 1) = grad(0, i);
  }
  return b;
}

DeformationOperator deformation_operator(const ShapeGrad& grad) {
  DeformationOperator b = DeformationOperator::Zero();
  for (int i = 0; i < 4; ++i) {
    b(0, 2 * i) = grad(0, i);
    b(1, 2 * i) = grad(1, i);
    b(2, 2 * i + 1) = grad(0, i);
    b(3, 2 * i + 1) = grad(1, i);
  }
  return b;
}

Elasticity plane_stress_elasticity(double nu) {
  if (!(nu > -1.0 && nu < 0.5)) throw InvalidArgument("Poisson ratio must lie in (-1, 0.5)");
  Elasticity c;
  c << 1.0, nu, 0.0,
       nu, 1.0, 0.0,
       0.0, 0.0, 0.5 * (1.0 - nu);
  return c / (1.0 - nu * nu);
}

ElementMatrix element_stiffness(double half_width, double half_height, double nu) {
  if (!(half_width > 0.0 && half_height > 0.0))
    throw InvalidArgument("element dimensions must be positive");
  ElementCoords xe;
  const double w = 2.0 * half_width;
  const double h = 2.0 * half_height;
  xe << 0.0, 0.0, w, 0.0, w, h, 0.0, h;
  const Elasticity c = plane_stress_elasticity(nu);
  const GaussRule rule = GaussRule::two_point();

  ElementMatrix k = ElementMatrix::Zero();
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      const double xi = rule.points[i];
      const double zeta = rule.points[j];
      const StrainOperator b0 = strain_operator(physical_grad(xe, xi, zeta));
      k += rule.weights[i] * rule.weights[j] * jacobian_det(xe, xi, zeta) * b0.transpose() * c * b0;
    }
  }
  return 0.5 * (k + k.transpose());
}

std::array<double, kLowerEntries> lower_entries(const ElementMatrix& m) {
  const auto& pat = lower_pattern();
  std::array<double, kLowerEntries> out{};
  for (int t = 0; t < kLowerEntries; ++t) out[t] = m(pat.row[t], pat.col[t]);
  return out;
}

}  // namespace bucktop
