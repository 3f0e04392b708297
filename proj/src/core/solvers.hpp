#pragma once

// Sparse Cholesky factorization of K and the linearized buckling eigensolve
// (G + mu K) phi = 0.

#include "fem_core.hpp"
#include "sparse.hpp"

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

namespace bucktop {

/// Cholesky factor P K P^T = L L^T of an SPD matrix given by its lower
/// triangle. Solves are serialized internally, so a const instance may be
/// shared between threads.
class FactorizedOperator {
 public:
  /// Throws SolverError (with the failing column) if K is not positive definite.
  explicit FactorizedOperator(const CscMatrix& lower);
  ~FactorizedOperator();
  FactorizedOperator(FactorizedOperator&&) noexcept;
  FactorizedOperator& operator=(FactorizedOperator&&) noexcept;
  FactorizedOperator(const FactorizedOperator&) = delete;
  FactorizedOperator& operator=(const FactorizedOperator&) = delete;

  Index size() const;

  /// K^{-1} B, column by column.
  Eigen::MatrixXd solve(const Eigen::MatrixXd& b) const;
  std::vector<double> solve(std::span<const double> b) const;

  /// P^T L^{-T} Y.
  Eigen::MatrixXd back_substitute(const Eigen::MatrixXd& y) const;
  /// L^{-1} P S.
  Eigen::MatrixXd forward_substitute(const Eigen::MatrixXd& s) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Free-DOF solve of K u = F, expanded to the full DOF vector.
std::vector<double> solve_state(const FactorizedOperator& factor, const GridModel& grid,
                                std::span<const double> load);

/// Multi-RHS variant: rhs is num_dofs x k; rows of fixed DOFs are ignored.
Eigen::MatrixXd solve_adjoint(const FactorizedOperator& factor, const GridModel& grid,
                              const Eigen::MatrixXd& rhs);

enum class EigenMethod { Auto, Lanczos, Dense };

struct EigenOptions {
  int n_eig = 1;
  int buffer = 4;
  EigenMethod method = EigenMethod::Auto;
  double tolerance = 1e-10;
  int max_restarts = 600;
  std::uint64_t seed = 1;
};

struct BucklingSolution {
  /// n_eig values, descending. Non-positive values are reported as 0.
  std::vector<double> mu;
  /// All computed values (n_eig + buffer), descending, unmodified.
  std::vector<double> raw_mu;
  /// 1/mu, +inf where mu is 0.
  std::vector<double> lambda;
  /// Leading entries of mu that are strictly positive.
  int num_positive = 0;
  /// Eigenvectors on free DOFs (n_free x n_eig) and on all DOFs, phi^T K phi = 1.
  Eigen::MatrixXd phi_free;
  Eigen::MatrixXd phi;
  /// ||G phi + mu K phi|| / ||K phi|| per reported mode.
  std::vector<double> residuals;
  int restarts = 0;
  EigenMethod method = EigenMethod::Dense;
};

/// The n_eig largest mu of (G + mu K) phi = 0 on the free DOFs.
/// The largest-magnitude entry of every eigenvector is made positive.
BucklingSolution buckling_eigs(const FactorizedOperator& factor, const CscMatrix& k_lower,
                               const CscMatrix& g_lower, const GridModel& grid,
                               const EigenOptions& options);

/// Smallest-algebraic eigenpairs of a symmetric operator of size n given as a
/// block matvec. Returns values ascending and orthonormal vectors.
struct LanczosResult {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
  std::vector<double> residuals;
  int restarts = 0;
  bool converged = false;
};

template <typename Op>
LanczosResult lanczos_smallest(Op&& op, Index n, int nev, int n_check, double tolerance,
                               int max_restarts, std::uint64_t seed);

}  // namespace bucktop

#include "lanczos_impl.hpp"
