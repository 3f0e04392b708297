#include "benchmark.hpp"

#include "assembly.hpp"
#include "errors.hpp"
#include "log.hpp"
#include "output.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <limits>
#include <random>

namespace bucktop {

namespace {

template <class F>
double seconds(F&& f) {
  const auto t0 = std::chrono::steady_clock::now();
  f();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

std::vector<BenchmarkRow> run_benchmark(const std::vector<int>& sizes, int reps, std::uint64_t seed) {
  if (reps < 1) throw InvalidArgument("benchmark needs at least one repetition");
  std::vector<BenchmarkRow> rows;
  for (int n : sizes) {
    if (n < 1) throw InvalidArgument("benchmark sizes must be positive");
    GridModel grid(n, n, 1.0);
    const Assembler assembler(grid, 0.3);
    const Interpolation interp;

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dens(0.01, 1.0);
    std::normal_distribution<double> disp(0.0, 1.0);
    std::vector<double> x(grid.num_elements()), u(grid.num_dofs());
    for (double& v : x) v = dens(rng);
    for (double& v : u) v = disp(rng);

    constexpr double inf = std::numeric_limits<double>::infinity();
    BenchmarkRow row{n, grid.num_elements(), inf, inf, inf, inf, 0, 0};
    std::size_t sink = 0;
    // Buffers persist across repetitions, as they do across optimizer iterations.
    Eigen::MatrixXd gp, z;
    for (int r = 0; r < reps; ++r) {
      row.t_sigma = std::min(row.t_sigma, seconds([&] { gauss_point_stress(grid, assembler.ops(), u, gp); }));
      row.t_Ge = std::min(row.t_Ge, seconds([&] { z_from_stress(assembler.ops(), gp, z); }));
      row.t_assemble = std::min(row.t_assemble, seconds([&] {
        sink += assembler.assemble_g(z, x, interp, false).nnz();
      }));
      row.t_K = std::min(row.t_K, seconds([&] { sink += assembler.assemble_k(x, interp, false).nnz(); }));
    }
    row.r_t1 = (row.t_sigma + row.t_Ge) / row.t_assemble;
    row.r_t2 = (row.t_sigma + row.t_Ge + row.t_assemble) / row.t_K;
    log::info("benchmark n=" + std::to_string(n) + " elements=" + std::to_string(row.elements) +
              " r_t1=" + format_seconds(row.r_t1) + " r_t2=" + format_seconds(row.r_t2) +
              (sink == 0 ? " (empty)" : ""));
    rows.push_back(row);
  }
  return rows;
}

void write_benchmark_csv(const std::filesystem::path& path, const std::vector<BenchmarkRow>& rows) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << "n,elements,t_sigma,t_Ge,t_assemble,t_K,r_t1,r_t2\n";
  for (const BenchmarkRow& r : rows)
    out << r.n << ',' << r.elements << ',' << format_seconds(r.t_sigma) << ','
        << format_seconds(r.t_Ge) << ',' << format_seconds(r.t_assemble) << ','
        << format_seconds(r.t_K) << ',' << format_seconds(r.r_t1) << ',' << format_seconds(r.r_t2)
        << '\n';
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace bucktop
