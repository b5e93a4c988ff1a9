#pragma once

#include <ostream>
#include <span>
#include <vector>

#include "core/types.hpp"

namespace patchdb {

/// Dense row-major matrix of doubles.
///
/// Patch matrices and database representatives are small (p_s x p_s, where
/// p_s rarely exceeds a few hundred), so everything here is plain unblocked
/// code with value semantics.
struct DenseMatrix {
  Index rows = 0;
  Index cols = 0;
  std::vector<double> a;  // row-major, rows*cols entries

  DenseMatrix() = default;
  DenseMatrix(Index r, Index c);                          // zero-initialized
  DenseMatrix(Index r, Index c, std::vector<double> data);  // validates finiteness

  static DenseMatrix identity(Index n);

  double& operator()(Index i, Index j) { return a[static_cast<std::size_t>(i * cols + j)]; }
  double operator()(Index i, Index j) const { return a[static_cast<std::size_t>(i * cols + j)]; }

  bool same_shape(const DenseMatrix& o) const { return rows == o.rows && cols == o.cols; }
};

/// In-place LU factorization with partial pivoting: P*M = L*U with unit
/// lower-triangular L and the factors stored combined in `lu`.
struct DenseFactor {
  DenseMatrix lu;
  std::vector<Index> pivots;  // pivots[i] = original row placed at position i
  Index dim = 0;
};

/// Factor a square matrix. Throws Errc::singular_matrix when a pivot falls
/// below 1e-14 times the largest initial magnitude of its column.
DenseFactor lu_factor(const DenseMatrix& m);

/// Solve (original matrix) * x = rhs using a computed factor.
std::vector<double> lu_solve(const DenseFactor& f, std::span<const double> rhs);

/// Allocation-free variants used in the preconditioner hot path.
void lu_solve_into(const DenseFactor& f, std::span<const double> rhs, std::span<double> out);
void lu_solve_transpose_into(const DenseFactor& f, std::span<const double> rhs, std::span<double> out);

void mat_vec(const DenseMatrix& m, std::span<const double> x, std::span<double> out);
void mat_tvec(const DenseMatrix& m, std::span<const double> x, std::span<double> out);

/// ||I - A * B^{-1}||_2 where B is given by its factor. The action of
/// C = I - A*B^{-1} and its transpose is realized with backsolves and
/// matvecs; B^{-1} is never formed. Power iteration on C^T C with a fixed
/// start vector, Rayleigh-quotient convergence at 1e-8 relative, capped at
/// 200 steps.
double spectral_distance(const DenseMatrix& a, const DenseFactor& bf);

/// Sum of absolute entrywise differences.
double entrywise_l1_distance(const DenseMatrix& a, const DenseMatrix& b);

/// Arithmetic per-entry mean of a nonempty list of same-shape matrices.
DenseMatrix entrywise_mean(std::span<const DenseMatrix> ms);
DenseMatrix entrywise_mean_indexed(std::span<const DenseMatrix> all, std::span<const Index> members);

/// Debug dump as CSV with 17 significant digits.
void dump_csv(const DenseMatrix& m, std::ostream& os);

}  // namespace patchdb
