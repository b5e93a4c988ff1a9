#pragma once

#include <span>
#include <vector>

#include "core/dense.hpp"
#include "core/types.hpp"

namespace patchdb {

struct Triplet {
  Index row;
  Index col;
  double value;
};

/// Square CSR matrix. Column indices are strictly increasing within each
/// row. Stored zeros are kept: they count as symbolic nonzeros, which the
/// patch detector relies on, so nothing in this module drops small entries.
struct SparseMatrix {
  Index n = 0;
  std::vector<Index> row_ptr;  // length n+1
  std::vector<Index> col_idx;
  std::vector<double> values;

  Index nnz() const { return static_cast<Index>(col_idx.size()); }
  Index row_nnz(Index i) const { return row_ptr[static_cast<std::size_t>(i) + 1] - row_ptr[static_cast<std::size_t>(i)]; }

  std::span<const Index> row_cols(Index i) const {
    return {col_idx.data() + row_ptr[static_cast<std::size_t>(i)], static_cast<std::size_t>(row_nnz(i))};
  }
  std::span<const double> row_values(Index i) const {
    return {values.data() + row_ptr[static_cast<std::size_t>(i)], static_cast<std::size_t>(row_nnz(i))};
  }

  /// Build from possibly-duplicated triplets; duplicates are summed in
  /// insertion order. Entries that sum to zero stay in the pattern.
  static SparseMatrix from_triplets(Index n, std::vector<Triplet> entries);
};

/// y = A*x. Rows are independent, so a parallel sweep is bitwise identical
/// to the serial one.
void spmv(const SparseMatrix& a, std::span<const double> x, std::span<double> y, int threads = 1);
std::vector<double> spmv(const SparseMatrix& a, std::span<const double> x);

/// Dense |idx| x |idx| submatrix with entry (i,j) = A[idx[i], idx[j]];
/// positions absent from the pattern become zero.
DenseMatrix extract_submatrix(const SparseMatrix& a, std::span<const Index> idx);

}  // namespace patchdb
