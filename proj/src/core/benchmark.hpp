#pragma once

// Scaling study of the stress-stiffness construction against K assembly.

#include "fem_core.hpp"

#include <cstdint>
#include <filesystem>
#include <vector>

namespace bucktop {

struct BenchmarkRow {
  int n = 0;            // square grid side
  Index elements = 0;
  double t_sigma = 0;   // Gauss-point stresses
  double t_Ge = 0;      // ten coefficients per element
  double t_assemble = 0;  // scatter of the G triplets into sparse form
  double t_K = 0;       // complete K assembly
  double r_t1 = 0;      // (t_sigma + t_Ge) / t_assemble
  double r_t2 = 0;      // (t_sigma + t_Ge + t_assemble) / t_K
};

/// Times each phase on n x n grids (all DOFs kept), minimum over reps.
std::vector<BenchmarkRow> run_benchmark(const std::vector<int>& sizes, int reps,
                                        std::uint64_t seed = 1);

void write_benchmark_csv(const std::filesystem::path& path, const std::vector<BenchmarkRow>& rows);

}  // namespace bucktop
