#include "assembly.hpp"
#include "oracles.hpp"
#include "presets.hpp"
#include "sensitivity.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

using namespace bucktop;

namespace {
std::vector<double> randoms(std::size_t n, unsigned seed, double lo, double hi) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> d(lo, hi);
  std::vector<double> v(n);
  for (double& x : v) x = d(rng);
  return v;
}

GridModel column(int nelx, int nely) {
  ColumnLayout layout;
  layout.band_elements = 2;
  layout.passive_rows = 2;
  return make_column(nelx, nely, 2.0, layout);
}
}  // namespace

TEST_CASE("KS aggregate: weights, shift invariance and limits") {
  const std::vector<double> v = {0.3, 0.7, 0.69, -0.2};
  const auto w = ks_weights(v, 50.0);
  CHECK(std::accumulate(w.begin(), w.end(), 0.0) == doctest::Approx(1.0));
  for (double x : w) CHECK(x >= 0.0);
  CHECK(ks_value(v, 1e6) == doctest::Approx(0.7).epsilon(1e-5));
  std::vector<double> shifted = v;
  for (double& x : shifted) x += 10.0;
  CHECK(ks_value(shifted, 50.0) == doctest::Approx(ks_value(v, 50.0) + 10.0));
  // Huge rho times large values must not overflow.
  const std::vector<double> big = {1e3, 999.0};
  CHECK(std::isfinite(ks_value(big, 1e4)));
  const std::vector<double> one = {0.42};
  CHECK(ks_value(one, 160.0) == 0.42);
}

TEST_CASE("KS gradient is the weighted sum of gradients") {
  const std::vector<double> v = {1.0, 0.95, 0.5};
  Eigen::MatrixXd g(2, 3);
  g << 1, 2, 3, 4, 5, 6;
  const auto w = ks_weights(v, 20.0);
  const auto d = ks_grad(v, g, 20.0);
  CHECK(d[0] == doctest::Approx(w[0] * 1 + w[1] * 2 + w[2] * 3));
  CHECK(d[1] == doctest::Approx(w[0] * 4 + w[1] * 5 + w[2] * 6));
}

TEST_CASE("volume and compliance gradients") {
  GridModel grid = preset_mbb(6, 3, 2.0);
  grid.set_passive({0}, {17});
  const auto x = randoms(18, 1, 0.2, 1.0);
  const auto v = volume_and_grad(grid, x);
  CHECK(v.value == doctest::Approx(std::accumulate(x.begin(), x.end(), 0.0) / 18));
  CHECK(v.grad[0] == 0.0);
  CHECK(v.grad[5] == doctest::Approx(1.0 / 18));

  const Interpolation in;
  const auto ev = oracle::evaluate(grid, x, in, 0.3, 0, 0, EigenMethod::Dense, true);
  CHECK(ev.dc[0] == 0.0);
  CHECK(ev.dc[17] == 0.0);
  // Errors are measured against the largest entry: c is O(500) here, so
  // round-off in the differences swamps the small entries relatively.
  const double scale = Eigen::Map<const Eigen::VectorXd>(ev.dc.data(), 18).cwiseAbs().maxCoeff();
  for (int e = 1; e < 17; ++e) {
    auto xp = x, xm = x;
    xp[e] += 1e-5;
    xm[e] -= 1e-5;
    const double fd = (oracle::evaluate(grid, xp, in, 0.3, 0, 0, EigenMethod::Dense, false).c -
                       oracle::evaluate(grid, xm, in, 0.3, 0, 0, EigenMethod::Dense, false).c) / 2e-5;
    CHECK(std::abs(ev.dc[e] - fd) < 1e-8 * scale);
  }
}

TEST_CASE("pair products and the doubled operator give phi'G phi") {
  GridModel grid(4, 3, 1.0);
  const auto u = randoms(grid.num_dofs(), 2, -1, 1);
  const auto phi = randoms(grid.num_dofs(), 3, -1, 1);
  const std::vector<double> ones(12, 1.0);
  const Assembler as(grid, 0.3);
  const Eigen::MatrixXd z = compute_z(grid, as.ops(), u);
  const Eigen::MatrixXd p = pair_products(grid, phi);
  Eigen::MatrixXd zd = z;
  for (int k : kOffDiagonalCoefficients) zd.col(k) *= 2.0;
  const double quad = (zd.cwiseProduct(p)).sum();
  const Eigen::MatrixXd g = oracle::dense_g(grid, u, ones, Interpolation{1, 1e-6, 3, 3}, 0.3);
  const Eigen::Map<const Eigen::VectorXd> ph(phi.data(), phi.size());
  CHECK(quad == doctest::Approx(ph.dot(g * ph)).epsilon(1e-12));
}

TEST_CASE("adjoint load is the u-gradient of phi'G(u)phi") {
  GridModel grid(5, 3, 1.0);
  const auto x = randoms(15, 4, 0.2, 1.0);
  const auto u = randoms(grid.num_dofs(), 5, -1, 1);
  const auto phi = randoms(grid.num_dofs(), 6, -1, 1);
  const Interpolation in;
  const Assembler as(grid, 0.3);
  const auto a = adjoint_load(grid, as.ops(), in, x, phi);
  const Eigen::Map<const Eigen::VectorXd> ph(phi.data(), phi.size());
  for (Index d = 0; d < grid.num_dofs(); d += 3) {
    std::vector<double> ud(grid.num_dofs(), 0.0);
    ud[d] = 1.0;  // quadratic form is linear in u
    const double ref = ph.dot(oracle::dense_g(grid, ud, x, in, 0.3) * ph);
    CHECK(a[d] == doctest::Approx(ref).epsilon(1e-10));
  }
}

TEST_CASE("individual mu sensitivities match differences") {
  const GridModel grid = column(10, 6);
  auto x = randoms(grid.num_elements(), 7, 0.4, 1.0);
  for (Index e : grid.passive_solid()) x[e] = 1.0;
  const Interpolation in;
  const auto ev = oracle::evaluate(grid, x, in, 0.3, 3, 160, EigenMethod::Dense, true);
  REQUIRE(ev.dmu.cols() == 3);
  for (Index e : {grid.active()[3], grid.active()[17], grid.active()[30]}) {
    auto xp = x, xm = x;
    xp[e] += 1e-6;
    xm[e] -= 1e-6;
    const auto ep = oracle::evaluate(grid, xp, in, 0.3, 3, 160, EigenMethod::Dense, false);
    const auto em = oracle::evaluate(grid, xm, in, 0.3, 3, 160, EigenMethod::Dense, false);
    for (int i = 0; i < 3; ++i) {
      const double fd = (ep.mu[i] - em.mu[i]) / 2e-6;
      CHECK(ev.dmu(e, i) == doctest::Approx(fd).epsilon(1e-5).scale(1e-6 * std::abs(ev.mu[i])));
    }
  }
  for (Index e : grid.passive_solid()) CHECK(ev.dmu(e, 0) == 0.0);
}
