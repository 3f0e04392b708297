// Acceptance suite. Usage: bucktop_acceptance [all | <id>...]
// Prints one PASS/FAIL line per criterion; exit status 1 if any failed.

#include "benchmark.hpp"
#include "config.hpp"
#include "design_field.hpp"
#include "driver.hpp"
#include "log.hpp"
#include "optimizer.hpp"
#include "oracles.hpp"
#include "presets.hpp"
#include "sensitivity.hpp"
#include "sparse.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace bucktop;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

std::vector<double> random_vector(std::mt19937_64& rng, std::size_t n, double lo, double hi) {
  std::uniform_real_distribution<double> d(lo, hi);
  std::vector<double> v(n);
  for (double& x : v) x = d(rng);
  return v;
}

GridModel small_column(int nelx, int nely, int band) {
  ColumnLayout layout;
  layout.band_elements = band;
  layout.passive_rows = band;
  layout.passive_cols = 1;
  return make_column(nelx, nely, 2.0, layout);
}

// 1. Z-path G against the dense element loop.
Outcome g_assembly() {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> dim(1, 6);
  std::normal_distribution<double> normal(0.0, 1.0);
  const Interpolation interp;
  double worst = 0.0;
  for (int t = 0; t < 10; ++t) {
    const int nelx = dim(rng), nely = dim(rng);
    GridModel grid(nelx, nely, 0.5 * nelx + 0.1 * t);
    std::vector<double> u(grid.num_dofs());
    for (double& v : u) v = normal(rng);
    const std::vector<double> x = random_vector(rng, grid.num_elements(), 0.0, 1.0);
    const Assembler as(grid, 0.3);
    const Eigen::MatrixXd g = to_dense_symmetric(as.assemble_g(compute_z(grid, as.ops(), u), x, interp, false));
    const Eigen::MatrixXd ref = oracle::dense_g(grid, u, x, interp, 0.3);
    worst = std::max(worst, (g - ref).cwiseAbs().maxCoeff());
  }
  return {worst < 1e-12, "max |G - G_dense| = " + fmt(worst) + " over 10 random instances"};
}

struct EigenCase {
  GridModel grid;
  std::vector<double> x;
  Eigen::MatrixXd k_free, g_free;
  BucklingSolution lanczos;
};

EigenCase eigen_case() {
  EigenCase c{small_column(20, 10, 2), {}, {}, {}, {}};
  std::mt19937_64 rng(5);
  c.x = random_vector(rng, c.grid.num_elements(), 0.5, 1.0);
  for (Index e : c.grid.passive_solid()) c.x[e] = 1.0;
  const Interpolation interp;
  const Assembler as(c.grid, 0.3);
  const CscMatrix k = as.assemble_k(c.x, interp);
  const FactorizedOperator factor(k);
  const std::vector<double> u = solve_state(factor, c.grid, c.grid.load());
  const CscMatrix g = as.assemble_g(compute_z(c.grid, as.ops(), u), c.x, interp);
  EigenOptions eo;
  eo.n_eig = 8;
  eo.method = EigenMethod::Lanczos;
  c.lanczos = buckling_eigs(factor, k, g, c.grid, eo);
  c.k_free = oracle::restrict_free(c.grid, oracle::dense_k(c.grid, c.x, interp, 0.3));
  c.g_free = oracle::restrict_free(c.grid, oracle::dense_g(c.grid, u, c.x, interp, 0.3));
  return c;
}

// 2. Lanczos against a dense generalized eigensolver.
Outcome eigensolve() {
  const EigenCase c = eigen_case();
  const Eigen::VectorXd ref = oracle::dense_mu(c.k_free, c.g_free, 8);
  double worst = 0.0;
  for (int i = 0; i < 8; ++i) worst = std::max(worst, std::abs(c.lanczos.mu[i] - ref(i)) / std::abs(ref(i)));
  const bool used_lanczos = c.lanczos.method == EigenMethod::Lanczos;
  return {worst < 1e-8 && used_lanczos,
          "20x10 column, max rel |mu_i - mu_i,dense| (i=1..8) = " + fmt(worst) +
              ", mu1 = " + fmt(c.lanczos.mu[0]) + (used_lanczos ? "" : ", Lanczos not used")};
}

// 7. Rayleigh consistency of the eigenpairs from criterion 2.
Outcome rayleigh() {
  const EigenCase c = eigen_case();
  double worst = 0.0;
  for (int i = 0; i < 8; ++i) {
    const Eigen::VectorXd phi = c.lanczos.phi_free.col(i);
    const double kk = phi.dot(c.k_free * phi);
    const double r = std::abs(phi.dot(c.g_free * phi) + c.lanczos.mu[i] * kk) / kk;
    worst = std::max(worst, r);
  }
  return {worst < 1e-8, "max |phi'G phi + mu phi'K phi| / phi'K phi = " + fmt(worst)};
}

// 3. Gradient checks against central differences.
Outcome gradients() {
  const Interpolation interp;
  std::mt19937_64 rng(7);
  std::ostringstream detail;
  bool ok = true;

  // (a) compliance, 8x4.
  {
    GridModel grid = preset_mbb(8, 4, 2.0);
    const std::vector<double> x = random_vector(rng, grid.num_elements(), 0.2, 1.0);
    const auto ev = oracle::evaluate(grid, x, interp, 0.3, 0, 0, EigenMethod::Dense, true);
    std::vector<double> fd(x.size());
    const double h = 1e-6;
    for (std::size_t e = 0; e < x.size(); ++e) {
      auto xp = x, xm = x;
      xp[e] += h;
      xm[e] -= h;
      fd[e] = (oracle::evaluate(grid, xp, interp, 0.3, 0, 0, EigenMethod::Dense, false).c -
               oracle::evaluate(grid, xm, interp, 0.3, 0, 0, EigenMethod::Dense, false).c) / (2 * h);
    }
    const double err = oracle::relative_error(ev.dc, fd);
    ok = ok && err < 1e-5;
    detail << "(a) compliance " << fmt(err);
  }

  // (b) KS of mu, 12x6, rho 160, nEig 6, 20 random active elements.
  const GridModel grid = small_column(12, 6, 2);
  {
    std::vector<double> x = random_vector(rng, grid.num_elements(), 0.3, 1.0);
    for (Index e : grid.passive_solid()) x[e] = 1.0;
    const auto ev = oracle::evaluate(grid, x, interp, 0.3, 6, 160.0, EigenMethod::Auto, true);
    std::vector<Index> pick = grid.active();
    std::shuffle(pick.begin(), pick.end(), rng);
    pick.resize(20);
    std::vector<double> an, fd;
    const double h = 1e-6;
    for (Index e : pick) {
      auto xp = x, xm = x;
      xp[e] += h;
      xm[e] -= h;
      const double jp = oracle::evaluate(grid, xp, interp, 0.3, 6, 160.0, EigenMethod::Dense, false).jks;
      const double jm = oracle::evaluate(grid, xm, interp, 0.3, 6, 160.0, EigenMethod::Dense, false).jks;
      fd.push_back((jp - jm) / (2 * h));
      an.push_back(ev.djks[e]);
    }
    const double err = oracle::relative_error(an, fd);
    ok = ok && err < 1e-4;
    detail << ", (b) KS[mu] " << fmt(err);
  }

  // (c) through filter (rmin 2) and projection (beta 6, eta 0.5).
  {
    DesignPipeline pipe(grid, 2.0, FilterBC::Neumann, FilterMode::Projection);
    DesignState st;
    st.x = random_vector(rng, grid.num_elements(), 0.3, 0.9);
    st.eta = 0.5;
    st.beta = 6.0;
    pipe.update(st);
    auto value = [&](const std::vector<double>& x, bool grads, oracle::Evaluation* out) {
      DesignState s = st;
      s.x = x;
      pipe.update(s);
      *out = oracle::evaluate(grid, s.x_phys, interp, 0.3, 6, 160.0,
                              grads ? EigenMethod::Auto : EigenMethod::Dense, grads);
      return s;
    };
    oracle::Evaluation ev;
    const DesignState s0 = value(st.x, true, &ev);
    const std::vector<double> dj = pipe.chain_to_design(ev.djks, s0);
    const std::vector<double> dc = pipe.chain_to_design(ev.dc, s0);
    std::vector<Index> pick = grid.active();
    std::shuffle(pick.begin(), pick.end(), rng);
    pick.resize(20);
    std::vector<double> an_j, fd_j, an_c, fd_c;
    const double h = 1e-6;
    for (Index e : pick) {
      auto xp = s0.x, xm = s0.x;
      xp[e] += h;
      xm[e] -= h;
      oracle::Evaluation ep, em;
      value(xp, false, &ep);
      value(xm, false, &em);
      fd_j.push_back((ep.jks - em.jks) / (2 * h));
      fd_c.push_back((ep.c - em.c) / (2 * h));
      an_j.push_back(dj[e]);
      an_c.push_back(dc[e]);
    }
    const double ej = oracle::relative_error(an_j, fd_j);
    const double ec = oracle::relative_error(an_c, fd_c);
    ok = ok && ej < 1e-4 && ec < 1e-4;
    detail << ", (c) chained KS[mu] " << fmt(ej) << " / compliance " << fmt(ec);
  }
  return {ok, "relative errors: " + detail.str()};
}

// 4. KS bounds.
Outcome ks_bounds() {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> len(1, 40);
  std::uniform_real_distribution<double> lrho(0.0, 4.0);
  int violations = 0;
  for (int t = 0; t < 1000; ++t) {
    const int q = len(rng);
    const double scale = std::pow(10.0, lrho(rng) - 2.0);
    const std::vector<double> v = random_vector(rng, q, -scale, scale);
    const double rho = std::pow(10.0, lrho(rng));
    const double mx = *std::max_element(v.begin(), v.end());
    const double ks = ks_value(v, rho);
    const double hi = mx + std::log(static_cast<double>(q)) / rho;
    if (ks < mx - 1e-14 * std::abs(mx) || ks > hi + 1e-14 * std::abs(hi)) ++violations;
  }
  return {violations == 0, std::to_string(violations) + " violations in 1000 vectors"};
}

// 5. Dual solution of the update rule.
Outcome dual() {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const OcParams par;
  int roots = 0, bad_psi = 0, bad_bounds = 0;
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const std::size_t m = 50;
    const std::vector<double> xt = random_vector(rng, m, 0.0, 1.0);
    const std::vector<double> dg0 = random_vector(rng, m, -1.0, 0.2);
    const std::vector<double> dg1 = random_vector(rng, m, -0.2, 1.0);
    const double g1 = -0.5 + u01(rng);
    const int loop = t % 2 == 0 ? 1 : 5;
    std::vector<double> x_old = random_vector(rng, m, 0.0, 1.0), x_old1 = random_vector(rng, m, 0.0, 1.0);
    Asymptotes prev;
    for (std::size_t e = 0; e < m; ++e) {
      prev.lower.push_back(x_old[e] - 0.05 - 0.2 * u01(rng));
      prev.upper.push_back(x_old[e] + 0.05 + 0.2 * u01(rng));
    }
    const double beta = 1.0 + 5.0 * u01(rng);
    const OcResult r = oc_update(loop, xt, dg0, g1, dg1, par, x_old, x_old1, prev, beta, false);
    const oracle::DualOracle o(loop, xt, dg0, g1, dg1, par, x_old, x_old1, prev, beta, false);
    for (std::size_t e = 0; e < m; ++e)
      if (r.x[e] < o.xl[e] - 1e-15 || r.x[e] > o.xu[e] + 1e-15) ++bad_bounds;
    if (r.branch == DualBranch::Root) {
      ++roots;
      const double psi = o.psi_at(r.x), psi0 = o.psi(0.0);
      const double rel = std::abs(psi) / (1.0 + std::abs(psi0));
      worst = std::max(worst, rel);
      if (rel > 1e-8) ++bad_psi;
    }
  }
  return {bad_psi == 0 && bad_bounds == 0 && roots > 0,
          std::to_string(roots) + "/100 bracketed, max |psi(kappa)|/(1+|psi(0)|) = " + fmt(worst) +
              ", " + std::to_string(bad_bounds) + " iterates outside the move limits"};
}

ConfigMap column_phase1(int maxit) {
  ConfigMap c;
  for (const auto& [k, v] : std::map<std::string, std::string>{
           {"preset", "column"}, {"nelx", "240"}, {"nely", "120"}, {"lx", "2"},
           {"problem", "VC"}, {"bounds", "{2.5}"}, {"rmin", "2"}, {"ft", "2"}, {"ftBC", "N"},
           {"eta", "0.5"}, {"beta", "2"}, {"beta_cont", "{150, 12, 25, 2}"},
           {"ocPar", "{0.1, 0.7, 1.2}"}, {"penalK", "3"}, {"penalG", "3"},
           {"maxit", std::to_string(maxit)}, {"write_images", "false"}})
    c.set(k, v);
  return c;
}

ConfigMap column_phase2(int maxit, const fs::path& x0) {
  ConfigMap c = column_phase1(maxit);
  for (const auto& [k, v] : std::map<std::string, std::string>{
           {"problem", "BCV"}, {"bounds", "{2.5, 0.25}"}, {"beta", "6"},
           {"beta_cont", "{160, 12, 25, 2}"}, {"pAgg", "160"}, {"nEig", "12"},
           {"x0", x0.string()}})
    c.set(k, v);
  return c;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("bucktop_acceptance_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

// 6. Two-phase column: minimum volume, then buckling reinforcement.
Outcome column_reinforcement() {
  const fs::path dir = scratch("6");
  ConfigMap p1 = column_phase1(300);
  p1.set("output_dir", (dir / "phase1").string());
  Run run1(p1.resolve());
  run1.execute();

  ConfigMap p2 = column_phase2(300, dir / "phase1" / "checkpoint.json");
  p2.set("output_dir", (dir / "phase2").string());
  p2.set("write_images", "true");
  Run run2(p2.resolve());
  run2.execute();

  const auto& h = run2.history();
  const IterationRecord& last = h.back();
  const double lambda_min_volume = h.front().lambda.front();
  const double lambda_final = last.lambda.front();
  const double g_v = last.f / 0.25 - 1.0;
  const double g_c = last.c / (2.5 * h.front().c) - 1.0;
  int bound_violations = 0;
  for (const auto& r : h)
    if (!(1.0 / r.jks <= r.lambda.front())) ++bound_violations;
  const double ratio = lambda_final / lambda_min_volume;
  const bool ok = g_v <= 1e-3 && g_c <= 1e-3 && ratio >= 3.0 && bound_violations == 0;
  return {ok, "phase1 f = " + fmt(run1.history().back().f) + ", lambda1 " + fmt(lambda_min_volume) +
                  " -> " + fmt(lambda_final) + " (x" + fmt(ratio) + "), g_V = " + fmt(g_v) +
                  ", g_c = " + fmt(g_c) + ", 1/J_KS > lambda1 in " +
                  std::to_string(bound_violations) + "/" + std::to_string(h.size()) + " iterations"};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// 9. Byte-identical histories from identical seeded runs.
Outcome determinism() {
  const fs::path dir = scratch("9");
  std::vector<std::string> csv;
  for (int rep = 0; rep < 2; ++rep) {
    const fs::path base = dir / ("rep" + std::to_string(rep));
    ConfigMap p1 = column_phase1(20);
    p1.set("output_dir", (base / "phase1").string());
    p1.set("log_timings", "false");
    p1.set("seed", "42");
    Run(p1.resolve()).execute();
    ConfigMap p2 = column_phase2(20, base / "phase1" / "checkpoint.json");
    p2.set("output_dir", (base / "phase2").string());
    p2.set("log_timings", "false");
    p2.set("seed", "42");
    Run(p2.resolve()).execute();
    csv.push_back(slurp(base / "phase1" / "history.csv") + slurp(base / "phase2" / "history.csv"));
  }
  const bool same = csv[0] == csv[1] && !csv[0].empty();
  return {same, "two runs x (20 [V,C] + 20 [B,C,V]) iterations, " + std::to_string(csv[0].size()) +
                    " bytes, " + (same ? "identical" : "different")};
}

double loglog_slope(const std::vector<double>& n, const std::vector<double>& t) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double k = static_cast<double>(n.size());
  for (std::size_t i = 0; i < n.size(); ++i) {
    const double x = std::log(n[i]), y = std::log(t[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (k * sxy - sx * sy) / (k * sxx - sx * sx);
}

// 8. Scaling trends of the assembly benchmark.
Outcome benchmark_trends() {
  const std::vector<int> sizes = {100, 178, 316, 562, 1000};
  const auto rows = run_benchmark(sizes, 7);
  write_benchmark_csv(scratch("8") / "benchmark.csv", rows);
  std::vector<double> n, ts, tg, ta, tk;
  for (const auto& r : rows) {
    n.push_back(static_cast<double>(r.elements));
    ts.push_back(r.t_sigma);
    tg.push_back(r.t_Ge);
    ta.push_back(r.t_assemble);
    tk.push_back(r.t_K);
  }
  const double s[4] = {loglog_slope(n, ts), loglog_slope(n, tg), loglog_slope(n, ta), loglog_slope(n, tk)};
  bool linear = true;
  for (double v : s) linear = linear && std::abs(v - 1.0) <= 0.3;
  const std::size_t k = rows.size();
  const bool monotone = rows[k - 2].r_t1 <= rows[k - 3].r_t1 && rows[k - 1].r_t1 <= rows[k - 2].r_t1;
  std::string r1;
  for (const auto& r : rows) r1 += (r1.empty() ? "" : " ") + fmt(r.r_t1);
  return {linear && monotone, "slopes sigma/Ge/assemble/K = " + fmt(s[0]) + "/" + fmt(s[1]) + "/" +
                                  fmt(s[2]) + "/" + fmt(s[3]) + ", r_t1 = " + r1 +
                                  ", r_t2(1e6) = " + fmt(rows.back().r_t2)};
}

struct Entry {
  std::string name;
  std::function<Outcome()> run;
  double budget;  // seconds, 0 when only reported
};

}  // namespace

int main(int argc, char** argv) {
  log::set_sink({});
  const std::map<int, Entry> all = {
      {1, {"G assembly matches the dense element loop", g_assembly, 1.0}},
      {2, {"Lanczos eigenvalues match a dense solver", eigensolve, 5.0}},
      {3, {"gradients match central differences", gradients, 60.0}},
      {4, {"KS aggregate bounds", ks_bounds, 1.0}},
      {5, {"dual root of the update rule", dual, 5.0}},
      {6, {"two-phase column reinforcement", column_reinforcement, 0.0}},
      {7, {"Rayleigh consistency of eigenpairs", rayleigh, 5.0}},
      {8, {"assembly benchmark scaling trends", benchmark_trends, 600.0}},
      {9, {"seeded runs are byte-identical", determinism, 0.0}},
  };
  std::vector<int> ids;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "all") {
      for (const auto& [id, e] : all) ids.push_back(id);
    } else {
      const int id = std::atoi(a.c_str());
      if (!all.count(id)) {
        std::fprintf(stderr, "unknown criterion '%s'\n", a.c_str());
        return 2;
      }
      ids.push_back(id);
    }
  }
  if (ids.empty())
    for (const auto& [id, e] : all) ids.push_back(id);

  int failed = 0;
  for (int id : ids) {
    const Entry& e = all.at(id);
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = e.run();
    } catch (const std::exception& ex) {
      o = {false, std::string("exception: ") + ex.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (e.budget > 0 && secs > e.budget) {
      o.pass = false;
      o.detail += ", over the " + fmt(e.budget) + " s budget";
    }
    std::printf("[%s] criterion %d: %s (%s; %.2f s)\n", o.pass ? "PASS" : "FAIL", id, e.name.c_str(),
                o.detail.c_str(), secs);
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  return failed == 0 ? 0 : 1;
}
