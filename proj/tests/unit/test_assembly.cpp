#include "assembly.hpp"
#include "errors.hpp"
#include "oracles.hpp"
#include "presets.hpp"
#include "sparse.hpp"

#include <doctest.h>

#include <random>

using namespace bucktop;

namespace {
std::vector<double> randoms(std::size_t n, unsigned seed, double lo = 0.0, double hi = 1.0) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> d(lo, hi);
  std::vector<double> v(n);
  for (double& x : v) x = d(rng);
  return v;
}
}  // namespace

TEST_CASE("triplet assembly sums duplicates and renumbers") {
  const std::vector<Index> rows = {0, 2, 2, 1, 2, 0};
  const std::vector<Index> cols = {0, 0, 0, 1, 2, 0};
  const std::vector<double> vals = {1, 2, 3, 4, 5, 6};
  const CscMatrix a = assemble_lower(rows, cols, vals, 3);
  const Eigen::MatrixXd d = to_dense_symmetric(a);
  CHECK(d(0, 0) == 7);
  CHECK(d(2, 0) == 5);
  CHECK(d(0, 2) == 5);
  CHECK(d(1, 1) == 4);
  CHECK(a.nnz() == 4);

  const std::vector<Index> map = {-1, 0, 1};
  const CscMatrix r = assemble_lower(rows, cols, vals, 2, map);
  const Eigen::MatrixXd dr = to_dense_symmetric(r);
  CHECK(dr(0, 0) == 4);
  CHECK(dr(1, 1) == 5);
  CHECK(dr(1, 0) == 0);

  const std::vector<Index> up_r = {0}, up_c = {1};
  const std::vector<double> one = {1.0};
  CHECK_THROWS_AS(assemble_lower(up_r, up_c, one, 2), InvalidArgument);
}

TEST_CASE("symmetric products agree with the dense matrix") {
  GridModel grid(5, 3, 2.0);
  const Assembler as(grid, 0.3);
  const CscMatrix k = as.assemble_k(randoms(15, 1, 0.1, 1.0), Interpolation{}, false);
  const auto x = randoms(grid.num_dofs(), 2);
  const auto y = symmetric_multiply(k, x);
  const Eigen::VectorXd ref = to_dense_symmetric(k) * Eigen::Map<const Eigen::VectorXd>(x.data(), x.size());
  const auto y2 = multiply(expand_symmetric(k), x);
  for (Index i = 0; i < grid.num_dofs(); ++i) {
    CHECK(y[i] == doctest::Approx(ref(i)));
    CHECK(y2[i] == doctest::Approx(ref(i)));
  }
}

TEST_CASE("interpolations and their derivatives") {
  const Interpolation in{1.0, 1e-6, 3.0, 2.0};
  CHECK(in.ek(1.0) == doctest::Approx(1.0));
  CHECK(in.ek(0.0) == doctest::Approx(1e-6));
  CHECK(in.dek(0.5) == doctest::Approx(3 * 0.25 * (1 - 1e-6)));
  CHECK(in.deg(0.5) == doctest::Approx(2 * 0.5));
  CHECK(in.eg(0.0) == 0.0);
  CHECK(in.eg(1.0) == 1.0);
}

TEST_CASE("K assembly matches the dense element loop") {
  GridModel grid(4, 3, 1.0);  // rectangular elements
  const auto x = randoms(12, 3, 0.0, 1.0);
  const Interpolation in;
  const Assembler as(grid, 0.3);
  const Eigen::MatrixXd k = to_dense_symmetric(as.assemble_k(x, in, false));
  CHECK((k - oracle::dense_k(grid, x, in, 0.3)).cwiseAbs().maxCoeff() < 1e-13);

  grid.set_fixed({0, 1, 2, 3});
  const Assembler asf(grid, 0.3);
  const Eigen::MatrixXd kf = to_dense_symmetric(asf.assemble_k(x, in));
  CHECK((kf - oracle::restrict_free(grid, oracle::dense_k(grid, x, in, 0.3))).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("G from ten coefficients matches the dense element loop") {
  GridModel grid(3, 5, 1.2);
  const auto u = randoms(grid.num_dofs(), 4, -1.0, 1.0);
  const auto x = randoms(15, 5);
  const Interpolation in{1.0, 1e-6, 3.0, 2.5};
  const Assembler as(grid, 0.3);
  const Eigen::MatrixXd z = compute_z(grid, as.ops(), u);
  const Eigen::MatrixXd g = to_dense_symmetric(as.assemble_g(z, x, in, false));
  CHECK((g - oracle::dense_g(grid, u, x, in, 0.3)).cwiseAbs().maxCoeff() < 1e-12);
  // Z is linear in u through dzdu.
  const Eigen::MatrixXd ue = gather(grid, u);
  CHECK((z - ue * as.ops().dzdu.transpose()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("expand_z_row rebuilds the element block structure") {
  Eigen::RowVectorXd z(10);
  for (int i = 0; i < 10; ++i) z(i) = i + 1;
  const ElementMatrix g = expand_z_row(z);
  CHECK((g - g.transpose()).norm() == 0);
  for (int t = 0; t < 10; ++t) {
    const int i = kCoefficientNodes[t][0], k = kCoefficientNodes[t][1];
    CHECK(g(2 * i, 2 * k) == z(t));
    CHECK(g(2 * i + 1, 2 * k + 1) == z(t));
    CHECK(g(2 * i + 1, 2 * k) == 0);
  }
}
