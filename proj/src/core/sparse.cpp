#include "core/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "core/errors.hpp"
#include "core/parallel.hpp"

namespace patchdb {

SparseMatrix SparseMatrix::from_triplets(Index n, std::vector<Triplet> entries) {
  require(n >= 0, Errc::invalid_argument, "negative matrix dimension");
  for (const auto& t : entries) {
    if (t.row < 0 || t.row >= n || t.col < 0 || t.col >= n)
      fail(Errc::index_out_of_range, "triplet index (" + std::to_string(t.row) + "," + std::to_string(t.col) +
                                         ") outside " + std::to_string(n) + "x" + std::to_string(n));
    require(std::isfinite(t.value), Errc::invalid_argument, "non-finite triplet value");
  }
  // Stable sort keeps duplicate contributions in insertion order so the
  // accumulated values do not depend on the sort implementation.
  std::stable_sort(entries.begin(), entries.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });

  SparseMatrix m;
  m.n = n;
  m.row_ptr.assign(static_cast<std::size_t>(n) + 1, 0);
  m.col_idx.reserve(entries.size());
  m.values.reserve(entries.size());

  std::size_t k = 0;
  for (Index i = 0; i < n; ++i) {
    while (k < entries.size() && entries[k].row == i) {
      const Index c = entries[k].col;
      double v = entries[k].value;
      ++k;
      while (k < entries.size() && entries[k].row == i && entries[k].col == c) {
        v += entries[k].value;
        ++k;
      }
      m.col_idx.push_back(c);
      m.values.push_back(v);
    }
    m.row_ptr[static_cast<std::size_t>(i) + 1] = static_cast<Index>(m.col_idx.size());
  }
  return m;
}

void spmv(const SparseMatrix& a, std::span<const double> x, std::span<double> y, int threads) {
  require(static_cast<Index>(x.size()) == a.n, Errc::dimension_mismatch, "spmv input length mismatch");
  require(static_cast<Index>(y.size()) == a.n, Errc::dimension_mismatch, "spmv output length mismatch");
  parallel_for(a.n, threads, [&](Index b, Index e) {
    for (Index i = b; i < e; ++i) {
      double s = 0.0;
      const Index lo = a.row_ptr[static_cast<std::size_t>(i)];
      const Index hi = a.row_ptr[static_cast<std::size_t>(i) + 1];
      for (Index p = lo; p < hi; ++p)
        s += a.values[static_cast<std::size_t>(p)] * x[static_cast<std::size_t>(a.col_idx[static_cast<std::size_t>(p)])];
      y[static_cast<std::size_t>(i)] = s;
    }
  });
}

std::vector<double> spmv(const SparseMatrix& a, std::span<const double> x) {
  std::vector<double> y(static_cast<std::size_t>(a.n));
  spmv(a, x, y);
  return y;
}

DenseMatrix extract_submatrix(const SparseMatrix& a, std::span<const Index> idx) {
  const Index m = static_cast<Index>(idx.size());
  for (Index v : idx)
    require(v >= 0 && v < a.n, Errc::index_out_of_range, "submatrix index outside matrix");

  // local[k] = (global index, local position), sorted by global index.
  std::vector<std::pair<Index, Index>> local(idx.size());
  for (Index k = 0; k < m; ++k) local[static_cast<std::size_t>(k)] = {idx[static_cast<std::size_t>(k)], k};
  std::sort(local.begin(), local.end());
  for (std::size_t k = 1; k < local.size(); ++k)
    require(local[k].first != local[k - 1].first, Errc::duplicate_index, "duplicate submatrix index");

  DenseMatrix out(m, m);
  for (Index r = 0; r < m; ++r) {
    const Index gi = idx[static_cast<std::size_t>(r)];
    const auto cols = a.row_cols(gi);
    const auto vals = a.row_values(gi);
    // Merge the sorted CSR row against the sorted local index list.
    std::size_t p = 0, q = 0;
    while (p < cols.size() && q < local.size()) {
      if (cols[p] < local[q].first) {
        ++p;
      } else if (cols[p] > local[q].first) {
        ++q;
      } else {
        out(r, local[q].second) = vals[p];
        ++p;
        ++q;
      }
    }
  }
  return out;
}

}  // namespace patchdb
