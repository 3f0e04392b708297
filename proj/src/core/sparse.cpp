#include "sparse.hpp"

#include "errors.hpp"

#include <algorithm>

namespace bucktop {

CscMatrix assemble_lower(std::span<const Index> rows, std::span<const Index> cols,
                         std::span<const double> values, Index n,
                         std::span<const Index> dof_map) {
  if (rows.size() != cols.size() || rows.size() != values.size())
    throw InvalidArgument("triplet arrays differ in length");
  const bool mapped = !dof_map.empty();
  auto map = [&](Index i) { return mapped ? dof_map[i] : i; };

  // Pass 1: bucket counts per column.
  std::vector<Index> count(static_cast<std::size_t>(n) + 1, 0);
  for (std::size_t t = 0; t < rows.size(); ++t) {
    const Index r = map(rows[t]);
    const Index c = map(cols[t]);
    if (r < 0 || c < 0) continue;
    if (r < c || r >= n) throw InvalidArgument("triplet outside the lower triangle");
    ++count[c + 1];
  }
  for (Index c = 0; c < n; ++c) count[c + 1] += count[c];

  // Pass 2: scatter into column buckets, preserving input order.
  std::vector<Index> bucket_row(count[n]);
  std::vector<double> bucket_val(count[n]);
  {
    std::vector<Index> next(count.begin(), count.end() - 1);
    for (std::size_t t = 0; t < rows.size(); ++t) {
      const Index r = map(rows[t]);
      const Index c = map(cols[t]);
      if (r < 0 || c < 0) continue;
      const Index slot = next[c]++;
      bucket_row[slot] = r;
      bucket_val[slot] = values[t];
    }
  }

  // Pass 3: merge duplicates per column with a row marker, then sort the
  // (short) unique row list of each column.
  CscMatrix out;
  out.rows = n;
  out.cols = n;
  out.col_ptr.assign(static_cast<std::size_t>(n) + 1, 0);
  out.row_idx.reserve(bucket_row.size() / 2 + 1);
  out.values.reserve(bucket_row.size() / 2 + 1);
  std::vector<Index> marker(n, -1);
  std::vector<std::pair<Index, double>> column;
  for (Index c = 0; c < n; ++c) {
    column.clear();
    for (Index k = count[c]; k < count[c + 1]; ++k) {
      const Index r = bucket_row[k];
      if (marker[r] >= 0) {
        column[marker[r]].second += bucket_val[k];
      } else {
        marker[r] = static_cast<Index>(column.size());
        column.emplace_back(r, bucket_val[k]);
      }
    }
    for (const auto& [r, v] : column) marker[r] = -1;
    // Insertion sort: columns hold ~20 entries on a structured grid.
    for (std::size_t i = 1; i < column.size(); ++i) {
      auto item = column[i];
      std::size_t j = i;
      while (j > 0 && column[j - 1].first > item.first) {
        column[j] = column[j - 1];
        --j;
      }
      column[j] = item;
    }
    for (const auto& [r, v] : column) {
      out.row_idx.push_back(r);
      out.values.push_back(v);
    }
    out.col_ptr[c + 1] = static_cast<Index>(out.row_idx.size());
  }
  return out;
}

std::vector<double> symmetric_multiply(const CscMatrix& lower, std::span<const double> x) {
  if (static_cast<Index>(x.size()) != lower.cols) throw InvalidArgument("matvec size mismatch");
  std::vector<double> y(lower.rows, 0.0);
  for (Index c = 0; c < lower.cols; ++c) {
    const double xc = x[c];
    double acc = 0.0;
    for (Index k = lower.col_ptr[c]; k < lower.col_ptr[c + 1]; ++k) {
      const Index r = lower.row_idx[k];
      const double v = lower.values[k];
      y[r] += v * xc;
      if (r != c) acc += v * x[r];
    }
    y[c] += acc;
  }
  return y;
}

CscMatrix expand_symmetric(const CscMatrix& lower) {
  const Index n = lower.cols;
  std::vector<Index> count(static_cast<std::size_t>(n) + 1, 0);
  for (Index c = 0; c < n; ++c) {
    for (Index k = lower.col_ptr[c]; k < lower.col_ptr[c + 1]; ++k) {
      const Index r = lower.row_idx[k];
      ++count[c + 1];
      if (r != c) ++count[r + 1];
    }
  }
  for (Index c = 0; c < n; ++c) count[c + 1] += count[c];

  CscMatrix full;
  full.rows = lower.rows;
  full.cols = n;
  full.col_ptr = count;
  full.row_idx.resize(count[n]);
  full.values.resize(count[n]);
  std::vector<Index> next(count.begin(), count.end() - 1);
  // Column c of the full matrix: upper part (rows < c) comes from row c of the
  // lower triangle. Visiting lower columns in increasing order keeps rows sorted.
  for (Index c = 0; c < n; ++c) {
    for (Index k = lower.col_ptr[c]; k < lower.col_ptr[c + 1]; ++k) {
      const Index r = lower.row_idx[k];
      if (r == c) continue;
      const Index slot = next[r]++;
      full.row_idx[slot] = c;
      full.values[slot] = lower.values[k];
    }
  }
  for (Index c = 0; c < n; ++c) {
    for (Index k = lower.col_ptr[c]; k < lower.col_ptr[c + 1]; ++k) {
      const Index slot = next[c]++;
      full.row_idx[slot] = lower.row_idx[k];
      full.values[slot] = lower.values[k];
    }
  }
  return full;
}

std::vector<double> multiply(const CscMatrix& a, std::span<const double> x) {
  if (static_cast<Index>(x.size()) != a.cols) throw InvalidArgument("matvec size mismatch");
  std::vector<double> y(a.rows, 0.0);
  for (Index c = 0; c < a.cols; ++c) {
    const double xc = x[c];
    for (Index k = a.col_ptr[c]; k < a.col_ptr[c + 1]; ++k) y[a.row_idx[k]] += a.values[k] * xc;
  }
  return y;
}

Eigen::MatrixXd to_dense_symmetric(const CscMatrix& lower) {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(lower.rows, lower.cols);
  for (Index c = 0; c < lower.cols; ++c) {
    for (Index k = lower.col_ptr[c]; k < lower.col_ptr[c + 1]; ++k) {
      const Index r = lower.row_idx[k];
      d(r, c) = lower.values[k];
      d(c, r) = lower.values[k];
    }
  }
  return d;
}

}  // namespace bucktop
