#pragma once

// Thick-restart Lanczos with full reorthogonalization (classical Gram-Schmidt,
// applied twice). The projected matrix is rebuilt from the orthogonalization
// coefficients, so the restart needs no special arrowhead bookkeeping.

#include "errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace bucktop {

namespace detail {

inline Eigen::VectorXd random_unit(Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  Eigen::VectorXd v(n);
  for (Index i = 0; i < n; ++i) v(i) = dist(rng);
  return v / v.norm();
}

// Orthogonalizes w against the first `cols` columns of v (twice) and returns
// the accumulated coefficients.
inline Eigen::VectorXd orthogonalize(const Eigen::MatrixXd& v, Index cols, Eigen::VectorXd& w) {
  Eigen::VectorXd h = v.leftCols(cols).transpose() * w;
  w.noalias() -= v.leftCols(cols) * h;
  const Eigen::VectorXd h2 = v.leftCols(cols).transpose() * w;
  w.noalias() -= v.leftCols(cols) * h2;
  return h + h2;
}

}  // namespace detail

template <typename Op>
LanczosResult lanczos_smallest(Op&& op, Index n, int nev, int n_check, double tolerance,
                               int max_restarts, std::uint64_t seed) {
  if (nev < 1 || nev > n) throw InvalidArgument("requested eigenpair count out of range");
  n_check = std::clamp(n_check, 1, nev);
  const Index ncv = std::min<Index>(n, std::max(3 * nev, nev + 30));
  std::mt19937_64 rng(seed);

  Eigen::MatrixXd v = Eigen::MatrixXd::Zero(n, ncv + 1);
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(ncv, ncv);
  v.col(0) = detail::random_unit(n, rng);

  LanczosResult result;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig;
  double beta = 0.0;
  Index start = 0;
  for (int cycle = 1; cycle <= max_restarts; ++cycle) {
    for (Index j = start; j < ncv; ++j) {
      Eigen::VectorXd w = op(Eigen::VectorXd(v.col(j)));
      const Eigen::VectorXd h = detail::orthogonalize(v, j + 1, w);
      t.col(j).head(j + 1) = h;
      t.row(j).head(j + 1) = h.transpose();
      beta = w.norm();
      const double scale = std::max(1.0, t.topLeftCorner(j + 1, j + 1).cwiseAbs().maxCoeff());
      if (beta <= 1e-13 * scale) {
        // Invariant subspace: continue with a fresh direction.
        beta = 0.0;
        Eigen::VectorXd r = detail::random_unit(n, rng);
        detail::orthogonalize(v, j + 1, r);
        const double rn = r.norm();
        v.col(j + 1) = rn > 0.0 ? Eigen::VectorXd(r / rn) : Eigen::VectorXd::Zero(n);
      } else {
        v.col(j + 1) = w / beta;
      }
    }

    eig.compute(t);
    if (eig.info() != Eigen::Success) throw SolverError("Lanczos projected eigenproblem failed");
    const Eigen::VectorXd& theta = eig.eigenvalues();
    const Eigen::MatrixXd& s = eig.eigenvectors();
    const double scale = std::max(theta.cwiseAbs().maxCoeff(), 1e-300);

    result.residuals.assign(nev, 0.0);
    bool converged = true;
    for (int i = 0; i < nev; ++i) {
      result.residuals[i] = std::abs(beta * s(ncv - 1, i));
      if (i < n_check && result.residuals[i] > tolerance * scale) converged = false;
    }
    result.restarts = cycle;

    if (converged || cycle == max_restarts || ncv == n) {
      result.converged = converged || ncv == n;
      result.values = theta.head(nev);
      result.vectors = v.leftCols(ncv) * s.leftCols(nev);
      return result;
    }

    const Index keep = std::min<Index>(ncv - 1, nev + (ncv - nev) / 2);
    const Eigen::MatrixXd kept = v.leftCols(ncv) * s.leftCols(keep);
    const Eigen::VectorXd next = v.col(ncv);
    v.leftCols(keep) = kept;
    v.col(keep) = next;
    t.setZero();
    for (Index i = 0; i < keep; ++i) t(i, i) = theta(i);
    start = keep;
  }
  throw SolverError("Lanczos: no restart cycles allowed");
}

}  // namespace bucktop
