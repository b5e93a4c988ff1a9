#include "core/precond.hpp"

#include <algorithm>
#include <string>

#include "core/errors.hpp"
#include "core/parallel.hpp"

namespace patchdb {

PatchPreconditioner PatchPreconditioner::exact(const SparseMatrix& a, PatchSet ps, double omega, int threads) {
  require(static_cast<Index>(ps.weights.size()) == a.n, Errc::dimension_mismatch,
          "patch set weights do not match the matrix size");
  PatchPreconditioner pc;
  pc.n_ = a.n;
  pc.omega_ = omega;
  pc.threads_ = threads;
  pc.compressed_ = false;
  pc.factors_.resize(static_cast<std::size_t>(ps.count()));
  std::vector<std::string> errors(static_cast<std::size_t>(ps.count()));
  parallel_for(ps.count(), threads, [&](Index b, Index e) {
    for (Index k = b; k < e; ++k) {
      try {
        pc.factors_[static_cast<std::size_t>(k)] =
            lu_factor(extract_submatrix(a, ps.patches[static_cast<std::size_t>(k)]));
      } catch (const Exception& ex) {
        errors[static_cast<std::size_t>(k)] = ex.what();
      }
    }
  });
  for (Index k = 0; k < ps.count(); ++k)
    if (!errors[static_cast<std::size_t>(k)].empty())
      fail(Errc::singular_matrix, "patch " + std::to_string(k) + ": " + errors[static_cast<std::size_t>(k)]);
  pc.ps_ = std::move(ps);
  return pc;
}

PatchPreconditioner PatchPreconditioner::compressed(PatchSet ps, Database db, double omega, int threads) {
  require(db.n_patches() == ps.count(), Errc::dimension_mismatch, "database does not cover the patch set");
  require(db.phi_onto(), Errc::invalid_argument, "assignment map must be onto the database");
  for (const auto& entry : db.entries)
    require(entry.factor.dim == ps.patch_size, Errc::dimension_mismatch,
            "database entry dimension does not match the patch size");
  PatchPreconditioner pc;
  pc.n_ = static_cast<Index>(ps.weights.size());
  pc.omega_ = omega;
  pc.threads_ = threads;
  pc.compressed_ = true;
  pc.db_ = std::move(db);
  pc.ps_ = std::move(ps);
  return pc;
}

Index PatchPreconditioner::stored_factors() const {
  return compressed_ ? db_.size() : static_cast<Index>(factors_.size());
}

void PatchPreconditioner::apply(std::span<const double> r, std::span<double> z) const {
  require(static_cast<Index>(r.size()) == n_, Errc::dimension_mismatch, "preconditioner input length mismatch");
  require(static_cast<Index>(z.size()) == n_, Errc::dimension_mismatch, "preconditioner output length mismatch");
  const Index np = ps_.count();
  const Index p_s = ps_.patch_size;

  // Solve all patch systems into a per-patch buffer (parallel, disjoint
  // slots), then scatter-add serially in patch order so the sums do not
  // depend on the thread count.
  std::vector<double> sols(static_cast<std::size_t>(np * p_s));
  parallel_for(np, threads_, [&](Index b, Index e) {
    std::vector<double> local(static_cast<std::size_t>(p_s));
    for (Index k = b; k < e; ++k) {
      const auto& idx = ps_.patches[static_cast<std::size_t>(k)];
      for (Index i = 0; i < p_s; ++i)
        local[static_cast<std::size_t>(i)] = r[static_cast<std::size_t>(idx[static_cast<std::size_t>(i)])];
      const DenseFactor& f = compressed_
                                 ? db_.entries[static_cast<std::size_t>(db_.phi[static_cast<std::size_t>(k)])].factor
                                 : factors_[static_cast<std::size_t>(k)];
      lu_solve_into(f, local, {sols.data() + k * p_s, static_cast<std::size_t>(p_s)});
    }
  });

  std::fill(z.begin(), z.end(), 0.0);
  for (Index k = 0; k < np; ++k) {
    const auto& idx = ps_.patches[static_cast<std::size_t>(k)];
    const double* sol = sols.data() + k * p_s;
    for (Index i = 0; i < p_s; ++i) z[static_cast<std::size_t>(idx[static_cast<std::size_t>(i)])] += sol[i];
  }
  for (Index i = 0; i < n_; ++i) z[static_cast<std::size_t>(i)] *= omega_ * ps_.weights[static_cast<std::size_t>(i)];
}

std::vector<double> smooth(const Preconditioner& pc, const SparseMatrix& a, std::span<const double> x,
                           std::span<const double> b, int threads) {
  require(static_cast<Index>(x.size()) == a.n && static_cast<Index>(b.size()) == a.n, Errc::dimension_mismatch,
          "smooth length mismatch");
  std::vector<double> residual(static_cast<std::size_t>(a.n));
  spmv(a, x, residual, threads);
  for (Index i = 0; i < a.n; ++i)
    residual[static_cast<std::size_t>(i)] = b[static_cast<std::size_t>(i)] - residual[static_cast<std::size_t>(i)];
  std::vector<double> z = pc.apply(residual);
  for (Index i = 0; i < a.n; ++i) z[static_cast<std::size_t>(i)] += x[static_cast<std::size_t>(i)];
  return z;
}

ComboPreconditioner::ComboPreconditioner(PatchPreconditioner patch_pc, const CoarseSpace& cs)
    : patch_pc_(std::move(patch_pc)), p0_(cs.p0) {
  require(p0_.fine_n == patch_pc_.size(), Errc::dimension_mismatch, "transfer operator does not match the patch term");
  coarse_ = band_factor(cs.coarse_matrix);
}

ComboPreconditioner::ComboPreconditioner(PatchPreconditioner patch_pc, TransferOp p0, BandedFactor coarse)
    : patch_pc_(std::move(patch_pc)), p0_(std::move(p0)), coarse_(std::move(coarse)) {
  require(p0_.fine_n == patch_pc_.size(), Errc::dimension_mismatch, "transfer operator does not match the patch term");
  require(coarse_.n == p0_.coarse_n, Errc::dimension_mismatch, "coarse factor does not match the transfer operator");
}

void ComboPreconditioner::apply(std::span<const double> r, std::span<double> z) const {
  patch_pc_.apply(r, z);
  const std::vector<double> coarse_rhs = p0_.apply_transpose(r);
  const std::vector<double> coarse_sol = coarse_.solve(coarse_rhs);
  const std::vector<double> fine = p0_.apply(coarse_sol);
  for (std::size_t i = 0; i < fine.size(); ++i) z[i] += fine[i];
}

}  // namespace patchdb
