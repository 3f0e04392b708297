#pragma once

// Design-variable pipeline: x -> filtered x~ -> projected x^ (physical).

#include "fem_core.hpp"

#include <optional>
#include <span>
#include <vector>

namespace bucktop {

enum class FilterBC { Dirichlet, Neumann };

enum class FilterMode : int {
  FilterOnly = 1,
  Projection = 2,
  VolumePreserving = 3,
};

/// Linear hat-weight density filter stored as an explicit row-normalized
/// sparse operator W, so that apply() = W x and apply_adjoint() = W^T s.
///
/// Neumann: each row is normalized by its in-domain weight sum.
/// Dirichlet: cells outside the domain count as zero density and every row is
/// normalized by the full (untruncated) stencil sum.
class DensityFilter {
 public:
  DensityFilter(int nelx, int nely, double rmin, FilterBC bc);

  std::vector<double> apply(std::span<const double> x) const;
  std::vector<double> apply_adjoint(std::span<const double> s) const;

  Index size() const { return static_cast<Index>(row_ptr_.size()) - 1; }
  double rmin() const { return rmin_; }
  FilterBC bc() const { return bc_; }

 private:
  double rmin_;
  FilterBC bc_;
  std::vector<Index> row_ptr_;
  std::vector<Index> col_idx_;
  std::vector<double> weights_;
};

double project_value(double x_tilde, double eta, double beta);
std::vector<double> project(std::span<const double> x_tilde, double eta, double beta);

struct ProjectionDerivs {
  std::vector<double> d_dtilde;  // dx^/dx~ per element, >= 0
  std::vector<double> d_deta;    // dx^/deta per element
};
ProjectionDerivs project_derivs(std::span<const double> x_tilde, double eta, double beta);

struct EtaSolution {
  double eta = 0.5;
  bool clamped = false;  // target unreachable: eta pinned to 0 or 1
};

/// Threshold eta in [0,1] such that mean(project(x~, eta, beta)) == target.
EtaSolution volume_preserving_eta(std::span<const double> x_tilde, double beta, double target_mean);

/// parCont = {istart, maxPar, isteps, deltaPar}. Fires on loops where
/// loop >= istart and (loop - istart) % isteps == 0.
struct ContinuationSchedule {
  int istart = 1;
  double max_value = 0.0;
  int isteps = 1;
  double delta = 0.0;
};

struct ContinuationStep {
  double value;
  bool changed;
};

ContinuationStep apply_continuation(double current, int loop, const ContinuationSchedule& schedule);

/// The three density fields plus the projection parameters currently in use.
struct DesignState {
  std::vector<double> x;
  std::vector<double> x_tilde;
  std::vector<double> x_phys;
  std::vector<double> dphys_dtilde;
  double eta = 0.5;
  double beta = 1.0;
};

/// Binds a filter and projection mode to a grid's passive sets.
class DesignPipeline {
 public:
  DesignPipeline(const GridModel& grid, double rmin, FilterBC bc, FilterMode mode);

  /// Recomputes x_tilde, x_phys, dphys_dtilde (and eta for the
  /// volume-preserving mode) from state.x. Passive values are imposed on
  /// x and x_phys.
  void update(DesignState& state) const;

  /// d(.)/dx from d(.)/dx^: multiply by dx^/dx~ then apply the filter adjoint.
  std::vector<double> chain_to_design(std::span<const double> d_dphys,
                                      const DesignState& state) const;

  FilterMode mode() const { return mode_; }
  const DensityFilter& filter() const { return filter_; }

 private:
  const GridModel* grid_;
  DensityFilter filter_;
  FilterMode mode_;
};

}  // namespace bucktop
