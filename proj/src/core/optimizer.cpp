#include "optimizer.hpp"

#include "errors.hpp"
#include "log.hpp"

#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

namespace bucktop {

// ---------------------------------------------------------------------------
// Problem definition

bool ProblemSpec::has(Criterion c) const {
  return std::find(criteria.begin(), criteria.end(), c) != criteria.end();
}

ProblemSpec ProblemSpec::parse(const std::string& letters, const std::vector<double>& bounds) {
  ProblemSpec s;
  auto need = [&](std::size_t n) {
    if (bounds.size() != n)
      throw ConfigError("problem " + letters + " expects " + std::to_string(n) +
                        " bound(s), got " + std::to_string(bounds.size()));
    for (double b : bounds)
      if (!(b > 0.0) || !std::isfinite(b)) throw ConfigError("problem bounds must be positive");
  };
  if (letters == "BCV") {
    need(2);
    s.criteria = {Criterion::Buckling, Criterion::Compliance, Criterion::Volume};
    s.cmax = bounds[0];
    s.vfmax = bounds[1];
    if (s.vfmax > 1.0) throw ConfigError("volume fraction bound must not exceed 1");
  } else if (letters == "VCB") {
    need(2);
    s.criteria = {Criterion::Volume, Criterion::Compliance, Criterion::Buckling};
    s.cmax = bounds[0];
    s.lmin = bounds[1];
  } else if (letters == "CV") {
    need(1);
    s.criteria = {Criterion::Compliance, Criterion::Volume};
    s.vfmax = bounds[0];
    if (s.vfmax > 1.0) throw ConfigError("volume fraction bound must not exceed 1");
  } else if (letters == "VC") {
    need(1);
    s.criteria = {Criterion::Volume, Criterion::Compliance};
    s.cmax = bounds[0];
  } else {
    throw ConfigError("unsupported problem '" + letters + "' (expected BCV, VCB, CV or VC)");
  }
  return s;
}

std::string ProblemSpec::letters() const {
  std::string out;
  for (Criterion c : criteria)
    out += c == Criterion::Buckling ? 'B' : c == Criterion::Compliance ? 'C' : 'V';
  return out;
}

std::vector<double> ProblemSpec::bounds() const {
  const std::string l = letters();
  if (l == "BCV") return {cmax, vfmax};
  if (l == "VCB") return {cmax, lmin};
  if (l == "CV") return {vfmax};
  return {cmax};
}

namespace {

std::vector<double> scaled(const std::vector<double>& v, double s) {
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = s * v[i];
  return out;
}

void aggregate(const std::vector<double>& values, const std::vector<std::vector<double>>& grads,
               double rho, ProblemFunctions& out) {
  Eigen::MatrixXd g(grads.front().size(), grads.size());
  for (std::size_t j = 0; j < grads.size(); ++j)
    g.col(j) = Eigen::Map<const Eigen::VectorXd>(grads[j].data(), grads[j].size());
  out.g1 = ks_value(values, rho);
  out.dg1 = ks_grad(values, g, rho);
  out.constraints = values;
}

}  // namespace

ProblemFunctions build_problem(const ProblemSpec& spec, const Responses& r, double rho) {
  ProblemFunctions out;
  out.jks = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> djks;
  if (spec.has_buckling()) {
    if (r.mu.empty()) throw SolverError("no positive buckling load factor available");
    out.jks = ks_value(r.mu, rho);
    djks = ks_grad(r.mu, r.dmu, rho);
  }

  const double g_v = spec.vfmax > 0.0 ? r.volume.value / spec.vfmax - 1.0 : 0.0;
  const double g_c = r.compliance.value / r.c_bar - 1.0;
  const std::string letters = spec.letters();
  if (letters == "CV") {
    out.g0 = r.compliance.value / r.c_ref;
    out.dg0 = scaled(r.compliance.grad, 1.0 / r.c_ref);
    out.g1 = g_v;
    out.dg1 = scaled(r.volume.grad, 1.0 / spec.vfmax);
    out.constraints = {g_v};
  } else if (letters == "VC") {
    out.g0 = r.volume.value;
    out.dg0 = r.volume.grad;
    out.g1 = g_c;
    out.dg1 = scaled(r.compliance.grad, 1.0 / r.c_bar);
    out.constraints = {g_c};
  } else if (letters == "BCV") {
    out.g0 = out.jks;
    out.dg0 = djks;
    aggregate({g_v, g_c}, {scaled(r.volume.grad, 1.0 / spec.vfmax),
                           scaled(r.compliance.grad, 1.0 / r.c_bar)},
              rho, out);
  } else {
    // The buckling constraint lambda_1 >= lmin, i.e. lmin * J[mu] - 1 <= 0.
    const double g_l = spec.lmin * out.jks - 1.0;
    out.g0 = r.volume.value;
    out.dg0 = r.volume.grad;
    aggregate({g_c, g_l}, {scaled(r.compliance.grad, 1.0 / r.c_bar), scaled(djks, spec.lmin)},
              rho, out);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Update rule

std::vector<double> OcSubproblem::primal(double kappa) const {
  std::vector<double> x(xt.size());
  for (std::size_t e = 0; e < xt.size(); ++e) {
    const double sp = std::sqrt(p0[e] + kappa * p1[e]);
    const double sq = std::sqrt(q0[e] + kappa * q1[e]);
    const double den = sp + sq;
    const double v = den > 0.0 ? (sp * lower[e] + sq * upper[e]) / den : xt[e];
    x[e] = std::min(x_upper[e], std::max(x_lower[e], v));
  }
  return x;
}

double OcSubproblem::psi(double kappa) const {
  const std::vector<double> x = primal(kappa);
  double sum = psi_offset;
  for (std::size_t e = 0; e < x.size(); ++e)
    sum += p1[e] / std::max(upper[e] - x[e], 1e-12) + q1[e] / std::max(x[e] - lower[e], 1e-12);
  return sum;
}

OcResult oc_update(int loop, std::span<const double> xt, std::span<const double> dg0, double g1,
                   std::span<const double> dg1, const OcParams& par,
                   std::span<const double> x_old, std::span<const double> x_old1,
                   const Asymptotes& asymptotes, double beta, bool restart) {
  const std::size_t n = xt.size();
  if (dg0.size() != n || dg1.size() != n) throw InvalidArgument("gradient length mismatch");
  if (!std::isfinite(g1)) throw InvalidArgument("constraint value is not finite");
  for (std::size_t e = 0; e < n; ++e)
    if (!std::isfinite(dg0[e]) || !std::isfinite(dg1[e]))
      throw InvalidArgument("non-finite sensitivity passed to the update");
  if (!(par.move >= 0.0 && par.move <= 1.0)) throw InvalidArgument("move limit must lie in [0, 1]");

  OcResult r;
  if (par.move == 0.0) {
    r.x.assign(xt.begin(), xt.end());
    r.asymptotes = asymptotes;
    r.x_lower = r.x;
    r.x_upper = r.x;
    r.branch = DualBranch::Frozen;
    return r;
  }

  OcSubproblem sp;
  sp.xt.assign(xt.begin(), xt.end());
  sp.lower.resize(n);
  sp.upper.resize(n);
  sp.x_lower.resize(n);
  sp.x_upper.resize(n);
  const bool init = loop < 2.5 || restart || asymptotes.lower.size() != n ||
                    x_old.size() != n || x_old1.size() != n;
  for (std::size_t e = 0; e < n; ++e) {
    const double xu = std::min(xt[e] + par.move, 1.0);
    const double xl = std::max(xt[e] - par.move, 0.0);
    if (init) {
      sp.lower[e] = xt[e] - 0.5 * (xu - xl) / (beta + 1.0);
      sp.upper[e] = xt[e] + 0.5 * (xu - xl) / (beta + 1.0);
    } else {
      const double tmp = (xt[e] - x_old[e]) * (x_old[e] - x_old1[e]);
      const double gm = tmp > 0.0 ? par.as_relax : tmp < 0.0 ? par.as_reduce : 1.0;
      sp.lower[e] = xt[e] - gm * (x_old[e] - asymptotes.lower[e]);
      sp.upper[e] = xt[e] + gm * (asymptotes.upper[e] - x_old[e]);
    }
    sp.x_lower[e] = std::max(0.9 * sp.lower[e] + 0.1 * xt[e], xl);
    sp.x_upper[e] = std::min(0.9 * sp.upper[e] + 0.1 * xt[e], xu);
  }

  sp.p0.resize(n);
  sp.q0.resize(n);
  sp.p1.resize(n);
  sp.q1.resize(n);
  double linear = 0.0;
  for (std::size_t e = 0; e < n; ++e) {
    const double du = sp.upper[e] - xt[e];
    const double dl = xt[e] - sp.lower[e];
    const double p10 = std::max(dg1[e], 0.0);
    const double q10 = std::min(dg1[e], 0.0);
    sp.p0[e] = std::max(dg0[e], 0.0) * du * du;
    sp.q0[e] = -std::min(dg0[e], 0.0) * dl * dl;
    sp.p1[e] = p10 * du * du;
    sp.q1[e] = -q10 * dl * dl;
    linear += du * p10 - dl * q10;
  }
  sp.psi_offset = g1 - linear;

  r.psi0 = sp.psi(0.0);
  const double psi_up = sp.psi(kDualUpper);
  if (r.psi0 * psi_up < 0.0) {
    auto f = [&](double k) { return sp.psi(k); };
    boost::math::tools::eps_tolerance<double> tol(std::numeric_limits<double>::digits - 2);
    std::uintmax_t iters = 200;
    const auto bracket =
        boost::math::tools::toms748_solve(f, 0.0, kDualUpper, r.psi0, psi_up, tol, iters);
    const double fa = std::abs(sp.psi(bracket.first));
    const double fb = std::abs(sp.psi(bracket.second));
    r.kappa = fa <= fb ? bracket.first : bracket.second;
    r.branch = DualBranch::Root;
    if (iters >= 200) {
      std::ostringstream msg;
      msg << "dual root search did not converge, bracket [" << bracket.first << ", "
          << bracket.second << "]";
      throw SolverError(msg.str());
    }
  } else if (r.psi0 <= 0.0) {
    r.kappa = 0.0;
    r.branch = DualBranch::Inactive;
  } else {
    r.kappa = kDualUpper;
    r.branch = DualBranch::Infeasible;
  }
  r.x = sp.primal(r.kappa);
  r.psi_kappa = r.branch == DualBranch::Root ? sp.psi(r.kappa) : r.branch == DualBranch::Inactive ? r.psi0 : psi_up;
  r.asymptotes.lower = std::move(sp.lower);
  r.asymptotes.upper = std::move(sp.upper);
  r.x_lower = std::move(sp.x_lower);
  r.x_upper = std::move(sp.x_upper);
  return r;
}

UpdateResult OcUpdater::update(const UpdateRequest& q) {
  last_ = oc_update(q.loop, q.x, q.dg0, q.g1, q.dg1, params_, x_old_, x_old1_, asymptotes_, q.beta,
                    q.restart);
  asymptotes_ = last_.asymptotes;
  x_old1_ = x_old_.empty() ? std::vector<double>(q.x.begin(), q.x.end()) : x_old_;
  x_old_.assign(q.x.begin(), q.x.end());
  return {last_.x, last_.kappa};
}

// ---------------------------------------------------------------------------
// Redesign loop

Optimizer::Optimizer(const GridModel& grid, OptimizerSettings settings, std::vector<double> x0)
    : grid_(&grid),
      settings_(std::move(settings)),
      assembler_(grid, settings_.nu),
      pipeline_(grid, settings_.rmin, settings_.filter_bc, settings_.filter_mode),
      updater_(std::make_unique<OcUpdater>(settings_.oc)) {
  if (settings_.problem.criteria.empty()) throw ConfigError("no optimization problem selected");
  if (settings_.problem.has_buckling() && settings_.n_eig < 1)
    throw ConfigError("nEig must be at least 1 when buckling is optimized");
  cont_ = {settings_.interp.penal_k, settings_.interp.penal_g, settings_.beta, settings_.rho};

  const Index m = grid.num_elements();
  if (x0.empty()) {
    x0.assign(m, 0.0);
    double start = 1.0;
    if (settings_.problem.objective() != Criterion::Volume) {
      const double act = static_cast<double>(grid.active().size());
      const double solid = static_cast<double>(grid.passive_solid().size());
      start = act > 0 ? std::clamp((settings_.problem.vfmax * m - solid) / act, 0.0, 1.0) : 0.0;
    }
    for (Index e : grid.active()) x0[e] = start;
  } else if (static_cast<Index>(x0.size()) != m) {
    throw InvalidArgument("initial design has " + std::to_string(x0.size()) +
                          " entries, the grid has " + std::to_string(m) + " elements");
  }
  for (double v : x0)
    if (!(v >= 0.0 && v <= 1.0)) throw InvalidArgument("initial design values must lie in [0, 1]");
  state_.x = std::move(x0);
  state_.eta = settings_.eta;
  state_.beta = settings_.filter_mode == FilterMode::FilterOnly ? 0.0 : cont_.beta;
  refresh_fields();
}

void Optimizer::set_continuation(const ContinuationState& cont) {
  cont_ = cont;
  state_.beta = settings_.filter_mode == FilterMode::FilterOnly ? 0.0 : cont_.beta;
  refresh_fields();
}

void Optimizer::set_updater(std::unique_ptr<DesignUpdater> updater) {
  if (!updater) throw InvalidArgument("updater must not be null");
  updater_ = std::move(updater);
}

void Optimizer::refresh_fields() { pipeline_.update(state_); }

Interpolation Optimizer::interpolation() const {
  Interpolation in = settings_.interp;
  in.penal_k = cont_.penal_k;
  in.penal_g = cont_.penal_g;
  return in;
}

IterationRecord Optimizer::step() {
  const auto t0 = std::chrono::steady_clock::now();
  const GridModel& grid = *grid_;
  ++loop_;
  const Interpolation interp = interpolation();

  // Physical field, state solve.
  pipeline_.update(state_);
  const CscMatrix k = assembler_.assemble_k(state_.x_phys, interp);
  const FactorizedOperator factor(k);
  u_ = solve_state(factor, grid, grid.load());

  Responses r;
  r.compliance = compliance_and_grad(grid, assembler_.ops(), interp, state_.x_phys, u_);
  r.volume = volume_and_grad(grid, state_.x_phys);
  if (loop_ == 1) {
    c_ref_ = r.compliance.value;
    c_bar_ = settings_.problem.cmax > 0.0 ? settings_.problem.cmax * c_ref_ : c_ref_;
    if (!(c_ref_ > 0.0)) throw SolverError("initial compliance is not positive; check the load");
  }
  r.c_ref = c_ref_;
  r.c_bar = c_bar_;

  // Buckling analysis.
  if (settings_.problem.has_buckling()) {
    const Eigen::MatrixXd z = compute_z(grid, assembler_.ops(), u_);
    const CscMatrix g = assembler_.assemble_g(z, state_.x_phys, interp);
    EigenOptions eo = settings_.eig;
    eo.n_eig = settings_.n_eig;
    buckling_ = buckling_eigs(factor, k, g, grid, eo);
    r.mu.assign(buckling_->mu.begin(), buckling_->mu.begin() + buckling_->num_positive);
    r.dmu = mu_sensitivities(grid, assembler_.ops(), interp, state_.x_phys, u_, z, *buckling_, factor);
  }

  const ProblemFunctions pf = build_problem(settings_.problem, r, cont_.rho);
  const std::vector<double> dg0 = pipeline_.chain_to_design(pf.dg0, state_);
  const std::vector<double> dg1 = pipeline_.chain_to_design(pf.dg1, state_);

  // Design update on the active set.
  const auto& act = grid.active();
  std::vector<double> xa(act.size()), d0(act.size()), d1(act.size());
  for (std::size_t i = 0; i < act.size(); ++i) {
    xa[i] = state_.x[act[i]];
    d0[i] = dg0[act[i]];
    d1[i] = dg1[act[i]];
  }
  UpdateRequest req;
  req.loop = loop_;
  req.x = xa;
  req.g0 = pf.g0;
  req.dg0 = d0;
  req.g1 = pf.g1;
  req.dg1 = d1;
  req.beta = state_.beta;
  req.restart = restart_;
  const UpdateResult up = updater_->update(req);
  if (up.x.size() != act.size()) throw InvalidArgument("updater returned a wrongly sized design");
  double change = 0.0;
  for (std::size_t i = 0; i < act.size(); ++i) {
    change = std::max(change, std::abs(up.x[i] - xa[i]));
    state_.x[act[i]] = up.x[i];
  }

  IterationRecord rec;
  rec.loop = loop_;
  rec.f = r.volume.value;
  rec.c = r.compliance.value;
  if (buckling_ && settings_.problem.has_buckling()) rec.lambda = buckling_->lambda;
  rec.jks = pf.jks;
  rec.g0 = pf.g0;
  rec.g1 = pf.g1;
  rec.kappa = up.kappa;
  rec.change = change;

  // Continuation; any change restarts the asymptotes on the next update.
  restart_ = false;
  auto advance = [&](double& value, const ContinuationSchedule& s) {
    const ContinuationStep st = apply_continuation(value, loop_, s);
    if (st.changed) {
      value = st.value;
      restart_ = true;
    }
  };
  advance(cont_.penal_k, settings_.penal_k_cont);
  advance(cont_.penal_g, settings_.penal_g_cont);
  if (settings_.filter_mode != FilterMode::FilterOnly) {
    advance(cont_.beta, settings_.beta_cont);
    state_.beta = cont_.beta;
  }
  advance(cont_.rho, settings_.rho_cont);

  converged_ = change < settings_.stop_change;
  if (settings_.log_timings)
    rec.t_iter = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rec;
}

}  // namespace bucktop
