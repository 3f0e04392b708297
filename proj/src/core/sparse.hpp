#pragma once

// Duplicate-summing triplet assembly into compressed-column storage.

#include "fem_core.hpp"

#include <span>
#include <vector>

namespace bucktop {

/// Compressed-column matrix. For symmetric operators only the lower triangle
/// (row >= col) is stored; row indices are sorted within each column.
struct CscMatrix {
  Index rows = 0;
  Index cols = 0;
  std::vector<Index> col_ptr;
  std::vector<Index> row_idx;
  std::vector<double> values;

  std::size_t nnz() const { return values.size(); }
};

/// Sums duplicate (row, col) entries of a lower-triangular triplet list.
///
/// `dof_map`, when non-empty, renumbers indices (full -> reduced) and drops
/// every triplet touching an index mapped to -1; `n` is then the reduced size.
/// Entries are accumulated in input order, so the result is bit-reproducible.
/// Throws InvalidArgument if a mapped entry lands above the diagonal.
CscMatrix assemble_lower(std::span<const Index> rows, std::span<const Index> cols,
                         std::span<const double> values, Index n,
                         std::span<const Index> dof_map = {});

/// y = A x for a symmetric matrix given by its lower triangle.
std::vector<double> symmetric_multiply(const CscMatrix& lower, std::span<const double> x);

/// Full symmetric storage (both triangles) from the lower triangle.
CscMatrix expand_symmetric(const CscMatrix& lower);

/// y = A x for a general (full) CSC matrix.
std::vector<double> multiply(const CscMatrix& a, std::span<const double> x);

/// Dense copy of the symmetric matrix whose lower triangle is given.
Eigen::MatrixXd to_dense_symmetric(const CscMatrix& lower);

}  // namespace bucktop
