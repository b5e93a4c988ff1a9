#pragma once

#include <span>
#include <vector>

#include "core/banded.hpp"
#include "core/compress.hpp"
#include "core/fem.hpp"
#include "core/patch.hpp"
#include "core/sparse.hpp"

namespace patchdb {

class Preconditioner {
 public:
  virtual ~Preconditioner() = default;
  virtual Index size() const = 0;
  virtual void apply(std::span<const double> r, std::span<double> z) const = 0;

  std::vector<double> apply(std::span<const double> r) const {
    std::vector<double> z(r.size());
    apply(r, z);
    return z;
  }
};

/// z = omega * W * sum_k V_k^T solve_k(V_k r), where solve_k uses the
/// patch's own factorization (Exact) or the database entry it is assigned
/// to (Compressed). DoFs not covered by any patch stay zero.
class PatchPreconditioner final : public Preconditioner {
 public:
  /// Factor every patch matrix of `a`.
  static PatchPreconditioner exact(const SparseMatrix& a, PatchSet ps, double omega = 1.0, int threads = 1);

  /// Reuse the m_p stored factorizations through phi.
  static PatchPreconditioner compressed(PatchSet ps, Database db, double omega = 1.0, int threads = 1);

  Index size() const override { return n_; }
  void apply(std::span<const double> r, std::span<double> z) const override;
  using Preconditioner::apply;

  bool is_compressed() const { return compressed_; }
  Index stored_factors() const;
  const PatchSet& patch_set() const { return ps_; }
  double omega() const { return omega_; }

 private:
  PatchSet ps_;
  std::vector<DenseFactor> factors_;  // exact mode, one per patch
  Database db_;                       // compressed mode
  bool compressed_ = false;
  Index n_ = 0;
  double omega_ = 1.0;
  int threads_ = 1;
};

/// One damped relaxation sweep x + omega * M^{-1} (b - A x); the damping is
/// the preconditioner's own omega.
std::vector<double> smooth(const Preconditioner& pc, const SparseMatrix& a, std::span<const double> x,
                           std::span<const double> b, int threads = 1);

/// Additive two-level preconditioner: patch term plus coarse correction
/// P0 (R0 A P0)^{-1} R0 with a banded direct solve of the coarse operator.
class ComboPreconditioner final : public Preconditioner {
 public:
  ComboPreconditioner(PatchPreconditioner patch_pc, const CoarseSpace& cs);

  /// Variant with a prefactored coarse operator, for callers that reuse the
  /// same coarse solve across several patch preconditioners.
  ComboPreconditioner(PatchPreconditioner patch_pc, TransferOp p0, BandedFactor coarse);

  Index size() const override { return patch_pc_.size(); }
  void apply(std::span<const double> r, std::span<double> z) const override;
  using Preconditioner::apply;

  const PatchPreconditioner& patch_pc() const { return patch_pc_; }
  const BandedFactor& coarse_factor() const { return coarse_; }

 private:
  PatchPreconditioner patch_pc_;
  TransferOp p0_;
  BandedFactor coarse_;
};

}  // namespace patchdb
