#include "solvers.hpp"

#include "errors.hpp"
#include "log.hpp"

#include <cholmod.h>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <sstream>

namespace bucktop {

struct FactorizedOperator::Impl {
  cholmod_common common{};
  cholmod_factor* factor = nullptr;
  Index n = 0;
  std::mutex mutex;

  Impl() {
    cholmod_start(&common);
    common.final_ll = 1;
    common.print = 0;
    common.error_handler = nullptr;
  }
  ~Impl() {
    if (factor) cholmod_free_factor(&factor, &common);
    cholmod_finish(&common);
  }

  cholmod_dense view(const Eigen::MatrixXd& m) const {
    cholmod_dense d{};
    d.nrow = static_cast<size_t>(m.rows());
    d.ncol = static_cast<size_t>(m.cols());
    d.nzmax = d.nrow * d.ncol;
    d.d = d.nrow;
    d.x = const_cast<double*>(m.data());
    d.z = nullptr;
    d.xtype = CHOLMOD_REAL;
    d.dtype = CHOLMOD_DOUBLE;
    return d;
  }

  Eigen::MatrixXd apply(int system, const Eigen::MatrixXd& b) {
    if (b.rows() != n) throw InvalidArgument("right-hand side length does not match the factor");
    if (b.cols() == 0) return Eigen::MatrixXd(n, 0);
    cholmod_dense in = view(b);
    cholmod_dense* out = cholmod_solve(system, factor, &in, &common);
    if (!out) throw SolverError("sparse triangular solve failed");
    Eigen::MatrixXd result =
        Eigen::Map<const Eigen::MatrixXd>(static_cast<const double*>(out->x), n, b.cols());
    cholmod_free_dense(&out, &common);
    return result;
  }
};

FactorizedOperator::FactorizedOperator(const CscMatrix& lower) : impl_(std::make_unique<Impl>()) {
  if (lower.rows != lower.cols) throw InvalidArgument("factorization needs a square matrix");
  auto& c = impl_->common;
  impl_->n = lower.rows;

  cholmod_sparse a{};
  a.nrow = static_cast<size_t>(lower.rows);
  a.ncol = static_cast<size_t>(lower.cols);
  a.nzmax = lower.nnz();
  a.p = const_cast<Index*>(lower.col_ptr.data());
  a.i = const_cast<Index*>(lower.row_idx.data());
  a.x = const_cast<double*>(lower.values.data());
  a.stype = -1;
  a.itype = CHOLMOD_INT;
  a.xtype = CHOLMOD_REAL;
  a.dtype = CHOLMOD_DOUBLE;
  a.sorted = 1;
  a.packed = 1;

  impl_->factor = cholmod_analyze(&a, &c);
  if (!impl_->factor) throw SolverError("symbolic factorization failed");
  cholmod_factorize(&a, impl_->factor, &c);
  if (c.status == CHOLMOD_NOT_POSDEF) {
    std::ostringstream msg;
    msg << "stiffness matrix is not positive definite (failed at column "
        << impl_->factor->minor << " of " << lower.rows << ")";
    throw SolverError(msg.str());
  }
  if (c.status != CHOLMOD_OK) throw SolverError("numeric factorization failed");
  if (!impl_->factor->is_ll) {
    // Convert a simplicial LDL' factor to LL' so that the split form is available.
    cholmod_change_factor(CHOLMOD_REAL, 1, impl_->factor->is_super, 1, 1, impl_->factor, &c);
    if (!impl_->factor->is_ll) throw SolverError("could not obtain an LL' factor");
  }
}

FactorizedOperator::~FactorizedOperator() = default;
FactorizedOperator::FactorizedOperator(FactorizedOperator&&) noexcept = default;
FactorizedOperator& FactorizedOperator::operator=(FactorizedOperator&&) noexcept = default;

Index FactorizedOperator::size() const { return impl_->n; }

Eigen::MatrixXd FactorizedOperator::solve(const Eigen::MatrixXd& b) const {
  std::lock_guard lock(impl_->mutex);
  return impl_->apply(CHOLMOD_A, b);
}

std::vector<double> FactorizedOperator::solve(std::span<const double> b) const {
  const Eigen::MatrixXd in = Eigen::Map<const Eigen::VectorXd>(b.data(), b.size());
  const Eigen::MatrixXd out = solve(in);
  return {out.data(), out.data() + out.size()};
}

Eigen::MatrixXd FactorizedOperator::back_substitute(const Eigen::MatrixXd& y) const {
  std::lock_guard lock(impl_->mutex);
  return impl_->apply(CHOLMOD_Pt, impl_->apply(CHOLMOD_Lt, y));
}

Eigen::MatrixXd FactorizedOperator::forward_substitute(const Eigen::MatrixXd& s) const {
  std::lock_guard lock(impl_->mutex);
  return impl_->apply(CHOLMOD_L, impl_->apply(CHOLMOD_P, s));
}

std::vector<double> solve_state(const FactorizedOperator& factor, const GridModel& grid,
                                std::span<const double> load) {
  if (static_cast<Index>(load.size()) != grid.num_dofs())
    throw InvalidArgument("load vector length does not match the grid");
  const auto& free = grid.free();
  Eigen::MatrixXd rhs(free.size(), 1);
  for (std::size_t k = 0; k < free.size(); ++k) rhs(k, 0) = load[free[k]];
  const Eigen::MatrixXd x = factor.solve(rhs);
  std::vector<double> u(grid.num_dofs(), 0.0);
  for (std::size_t k = 0; k < free.size(); ++k) u[free[k]] = x(k, 0);
  return u;
}

Eigen::MatrixXd solve_adjoint(const FactorizedOperator& factor, const GridModel& grid,
                              const Eigen::MatrixXd& rhs) {
  if (rhs.rows() != grid.num_dofs())
    throw InvalidArgument("adjoint right-hand sides must span all DOFs");
  const auto& free = grid.free();
  Eigen::MatrixXd reduced(free.size(), rhs.cols());
  for (std::size_t k = 0; k < free.size(); ++k) reduced.row(k) = rhs.row(free[k]);
  const Eigen::MatrixXd x = factor.solve(reduced);
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(grid.num_dofs(), rhs.cols());
  for (std::size_t k = 0; k < free.size(); ++k) w.row(free[k]) = x.row(k);
  return w;
}

namespace {

void canonical_sign(Eigen::Ref<Eigen::VectorXd> v) {
  Index best = 0;
  for (Index i = 1; i < v.size(); ++i)
    if (std::abs(v(i)) > std::abs(v(best))) best = i;
  if (v.size() > 0 && v(best) < 0.0) v = -v;
}

struct RawPairs {
  Eigen::VectorXd d;        // ascending eigenvalues of (G, K), d = -mu
  Eigen::MatrixXd vectors;  // K-normalized, free DOFs
  int restarts = 0;
};

RawPairs dense_pairs(const CscMatrix& k_lower, const CscMatrix& g_lower, int nev) {
  const Eigen::MatrixXd k = to_dense_symmetric(k_lower);
  const Eigen::MatrixXd g = to_dense_symmetric(g_lower);
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(g, k);
  if (solver.info() != Eigen::Success) throw SolverError("dense generalized eigensolve failed");
  RawPairs out;
  out.d = solver.eigenvalues().head(nev);
  out.vectors = solver.eigenvectors().leftCols(nev);
  return out;
}

}  // namespace

BucklingSolution buckling_eigs(const FactorizedOperator& factor, const CscMatrix& k_lower,
                               const CscMatrix& g_lower, const GridModel& grid,
                               const EigenOptions& options) {
  const Index n = factor.size();
  if (k_lower.rows != n || g_lower.rows != n)
    throw InvalidArgument("K, G and the factor must share the free-DOF dimension");
  if (options.n_eig < 1) throw InvalidArgument("at least one eigenpair must be requested");
  if (options.n_eig > n) throw InvalidArgument("more eigenpairs requested than free DOFs");
  const int nev = static_cast<int>(std::min<Index>(n, options.n_eig + options.buffer));
  const Index ncv = std::min<Index>(n, std::max(3 * nev, nev + 30));

  EigenMethod method = options.method;
  if (method == EigenMethod::Auto) method = (ncv >= n || n < 64) ? EigenMethod::Dense : EigenMethod::Lanczos;

  RawPairs pairs;
  if (method == EigenMethod::Lanczos) {
    auto op = [&](const Eigen::VectorXd& y) -> Eigen::VectorXd {
      const Eigen::MatrixXd t = factor.back_substitute(y);
      const std::vector<double> gt =
          symmetric_multiply(g_lower, std::span<const double>(t.data(), t.size()));
      const Eigen::MatrixXd s = Eigen::Map<const Eigen::VectorXd>(gt.data(), gt.size());
      return factor.forward_substitute(s).col(0);
    };
    const LanczosResult lr = lanczos_smallest(op, n, nev, options.n_eig, options.tolerance,
                                              options.max_restarts, options.seed);
    if (!lr.converged) {
      std::ostringstream msg;
      msg << "Lanczos did not converge after " << lr.restarts << " restarts; residuals:";
      for (int i = 0; i < options.n_eig; ++i) msg << ' ' << lr.residuals[i];
      if (options.method == EigenMethod::Auto && n < 2000) {
        log::warning(msg.str() + "; falling back to the dense solver");
        method = EigenMethod::Dense;
      } else {
        throw SolverError(msg.str());
      }
    } else {
      pairs.d = lr.values;
      pairs.vectors = factor.back_substitute(lr.vectors);
      pairs.restarts = lr.restarts;
    }
  }
  if (method == EigenMethod::Dense) pairs = dense_pairs(k_lower, g_lower, nev);

  BucklingSolution sol;
  sol.method = method;
  sol.restarts = pairs.restarts;
  sol.raw_mu.resize(nev);
  for (int i = 0; i < nev; ++i) sol.raw_mu[i] = -pairs.d(i);

  const int ne = options.n_eig;
  sol.mu.resize(ne);
  sol.lambda.resize(ne);
  sol.phi_free = pairs.vectors.leftCols(ne);
  for (int i = 0; i < ne; ++i) {
    canonical_sign(sol.phi_free.col(i));
    const double mu = sol.raw_mu[i];
    if (mu > 0.0) {
      sol.mu[i] = mu;
      sol.lambda[i] = 1.0 / mu;
      if (sol.num_positive == i) ++sol.num_positive;
    } else {
      sol.mu[i] = 0.0;
      sol.lambda[i] = std::numeric_limits<double>::infinity();
    }
  }
  if (sol.num_positive < ne)
    log::warning("only " + std::to_string(sol.num_positive) + " of " + std::to_string(ne) +
                 " buckling load factors are positive");

  sol.phi = Eigen::MatrixXd::Zero(grid.num_dofs(), ne);
  const auto& free = grid.free();
  for (std::size_t k = 0; k < free.size(); ++k) sol.phi.row(free[k]) = sol.phi_free.row(k);

  sol.residuals.resize(ne);
  for (int i = 0; i < ne; ++i) {
    const std::span<const double> p(sol.phi_free.col(i).data(), n);
    const std::vector<double> kp = symmetric_multiply(k_lower, p);
    const std::vector<double> gp = symmetric_multiply(g_lower, p);
    double num = 0.0, den = 0.0;
    for (Index r = 0; r < n; ++r) {
      const double e = gp[r] + sol.raw_mu[i] * kp[r];
      num += e * e;
      den += kp[r] * kp[r];
    }
    sol.residuals[i] = den > 0.0 ? std::sqrt(num / den) : 0.0;
  }
  return sol;
}

}  // namespace bucktop
