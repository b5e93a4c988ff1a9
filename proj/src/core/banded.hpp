#pragma once

#include <span>
#include <vector>

#include "core/sparse.hpp"
#include "core/types.hpp"

namespace patchdb {

/// LU factorization with partial pivoting in LAPACK-style band storage.
/// Used as the sparse-aware direct solver for the coarse operator; the
/// extra kl rows hold the fill introduced by pivoting.
struct BandedFactor {
  Index n = 0;
  Index kl = 0;
  Index ku = 0;
  std::vector<double> ab;  // (2*kl+ku+1) rows of length n, row-major
  std::vector<Index> ipiv;

  std::vector<double> solve(std::span<const double> rhs) const;
  void solve_into(std::span<const double> rhs, std::span<double> out) const;
};

BandedFactor band_factor(const SparseMatrix& a);

}  // namespace patchdb
