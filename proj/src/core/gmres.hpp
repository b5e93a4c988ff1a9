#pragma once

#include <span>
#include <vector>

#include "core/precond.hpp"
#include "core/sparse.hpp"

namespace patchdb {

struct SolveReport {
  Index iterations = 0;  // total inner Arnoldi steps
  Index restarts = 0;
  std::vector<double> residual_history;  // estimates per inner step, starting at ||r0||
  bool converged = false;
  double final_relative_residual = 0.0;  // recomputed ||b - A x|| / ||b||
};

struct GmresOptions {
  Index restart = 20;
  double tol = 1e-8;
  Index max_iters = 2000;
  bool left_precond = false;  // default is right preconditioning on the true residual
  int threads = 1;
};

struct GmresResult {
  std::vector<double> x;
  SolveReport report;
};

/// Restarted GMRES with modified Gram-Schmidt and Givens rotations, zero
/// initial guess. With right preconditioning the iteration runs on
/// A M^{-1} y = b with x = M^{-1} y, so the residual estimate tracks the
/// true residual; convergence is confirmed against the recomputed true
/// residual at the end of each cycle. Happy breakdown counts as
/// convergence; hitting max_iters returns the best iterate unconverged.
GmresResult gmres(const SparseMatrix& a, std::span<const double> b, const Preconditioner* pc,
                  const GmresOptions& opt);

}  // namespace patchdb
