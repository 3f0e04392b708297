#include "design_field.hpp"
#include "errors.hpp"

#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

using namespace bucktop;

namespace {
std::vector<double> randoms(std::size_t n, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> d(0.0, 1.0);
  std::vector<double> v(n);
  for (double& x : v) x = d(rng);
  return v;
}
}  // namespace

TEST_CASE("Neumann filter preserves constants, Dirichlet darkens the border") {
  const DensityFilter n(7, 5, 2.5, FilterBC::Neumann);
  const DensityFilter d(7, 5, 2.5, FilterBC::Dirichlet);
  const std::vector<double> ones(35, 1.0);
  for (double v : n.apply(ones)) CHECK(v == doctest::Approx(1.0));
  const auto dv = d.apply(ones);
  CHECK(dv[0] < 1.0);                    // corner element loses its outside neighbours
  CHECK(dv[2 * 5 + 2] == doctest::Approx(1.0));  // stencil fits inside for the centre
}

TEST_CASE("filter adjoint is the transpose") {
  for (FilterBC bc : {FilterBC::Neumann, FilterBC::Dirichlet}) {
    const DensityFilter f(6, 4, 1.8, bc);
    const auto x = randoms(24, 1), s = randoms(24, 2);
    const auto wx = f.apply(x), wts = f.apply_adjoint(s);
    CHECK(std::inner_product(wx.begin(), wx.end(), s.begin(), 0.0) ==
          doctest::Approx(std::inner_product(x.begin(), x.end(), wts.begin(), 0.0)).epsilon(1e-13));
  }
}

TEST_CASE("filter with rmin below one element is the identity") {
  const DensityFilter f(4, 3, 0.9, FilterBC::Neumann);
  const auto x = randoms(12, 3);
  const auto y = f.apply(x);
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(y[i] == doctest::Approx(x[i]));
}

TEST_CASE("projection values and derivatives") {
  CHECK(project_value(0.0, 0.5, 8) == doctest::Approx(0.0));
  CHECK(project_value(1.0, 0.5, 8) == doctest::Approx(1.0));
  CHECK(project_value(0.5, 0.5, 8) == doctest::Approx(0.5));
  CHECK(project_value(0.3, 0.5, 0) == 0.3);
  const std::vector<double> xt = {0.1, 0.35, 0.5, 0.8};
  const auto d = project_derivs(xt, 0.45, 6.0);
  const double h = 1e-7;
  for (std::size_t i = 0; i < xt.size(); ++i) {
    const double fd = (project_value(xt[i] + h, 0.45, 6) - project_value(xt[i] - h, 0.45, 6)) / (2 * h);
    CHECK(d.d_dtilde[i] == doctest::Approx(fd).epsilon(1e-6));
    const double fe = (project_value(xt[i], 0.45 + h, 6) - project_value(xt[i], 0.45 - h, 6)) / (2 * h);
    CHECK(d.d_deta[i] == doctest::Approx(fe).epsilon(1e-6));
  }
}

TEST_CASE("volume preserving threshold reproduces the filtered mean") {
  const auto xt = randoms(200, 4);
  const double target = std::accumulate(xt.begin(), xt.end(), 0.0) / xt.size();
  const EtaSolution s = volume_preserving_eta(xt, 8.0, target);
  const auto xp = project(xt, s.eta, 8.0);
  CHECK_FALSE(s.clamped);
  CHECK(std::accumulate(xp.begin(), xp.end(), 0.0) / xp.size() == doctest::Approx(target).epsilon(1e-10));
}

TEST_CASE("continuation fires on loop >= istart with period isteps") {
  const ContinuationSchedule s{150, 12, 25, 2};
  CHECK_FALSE(apply_continuation(2, 149, s).changed);
  auto st = apply_continuation(2, 150, s);
  CHECK(st.changed);
  CHECK(st.value == 4);
  CHECK_FALSE(apply_continuation(4, 151, s).changed);
  CHECK(apply_continuation(4, 175, s).value == 6);
  st = apply_continuation(12, 400, s);
  CHECK_FALSE(st.changed);
  CHECK(st.value == 12);
  CHECK(apply_continuation(11, 400, s).value == 12);
  CHECK_THROWS_AS(apply_continuation(1, 1, ContinuationSchedule{1, 2, 0, 1}), InvalidArgument);
}

TEST_CASE("pipeline imposes passive values and chains derivatives") {
  GridModel grid(6, 4, 1.5);
  grid.set_passive({0, 1}, {23});
  for (FilterMode mode : {FilterMode::FilterOnly, FilterMode::Projection}) {
    DesignPipeline pipe(grid, 1.6, FilterBC::Neumann, mode);
    DesignState st;
    st.x = randoms(24, 5);
    st.eta = 0.4;
    st.beta = mode == FilterMode::FilterOnly ? 0.0 : 4.0;
    pipe.update(st);
    CHECK(st.x[0] == 1.0);
    CHECK(st.x_phys[1] == 1.0);
    CHECK(st.x_phys[23] == 0.0);

    // d(sum w_e x^_e)/dx through the pipeline vs differences.
    const auto w = randoms(24, 6);
    const auto g = pipe.chain_to_design(w, st);
    auto objective = [&](std::vector<double> x) {
      DesignState s = st;
      s.x = std::move(x);
      pipe.update(s);
      return std::inner_product(w.begin(), w.end(), s.x_phys.begin(), 0.0);
    };
    for (Index e : grid.active()) {
      auto xp = st.x, xm = st.x;
      xp[e] += 1e-6;
      xm[e] -= 1e-6;
      CHECK(g[e] == doctest::Approx((objective(xp) - objective(xm)) / 2e-6).epsilon(1e-6));
    }
  }
}
