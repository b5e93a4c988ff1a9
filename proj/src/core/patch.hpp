#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "core/dense.hpp"
#include "core/sparse.hpp"

namespace patchdb {

/// A set of same-size patches: each patch is the sorted list of global DoF
/// ids it covers, plus the diagonal overlap weights (reciprocal cover
/// counts; uncovered DoFs get weight zero).
struct PatchSet {
  Index patch_size = 0;
  std::vector<std::vector<Index>> patches;
  std::vector<double> weights;  // length n

  Index count() const { return static_cast<Index>(patches.size()); }
};

/// weights[i] = 1 / #patches containing i, or 0 when uncovered.
std::vector<double> compute_weights(Index n, const std::vector<std::vector<Index>>& patches);

/// Detect cell-restricted patches from the matrix alone: candidate rows are
/// those with exactly patch_size stored entries; a candidate's column set is
/// emitted when all candidate rows inside it share the same candidate
/// footprint. Duplicate sets are emitted once; the result is ordered by
/// smallest contained index. Throws Errc::no_patches_found when nothing is
/// detected.
PatchSet detect_patches(const SparseMatrix& a, Index patch_size);

/// A_k = V_k A V_k^T for every patch, in patch order.
std::vector<DenseMatrix> extract_all(const SparseMatrix& a, const PatchSet& ps, int threads = 1);

/// Which local rows of a patch matrix are Dirichlet rows (exactly one
/// nonzero value). Patches may only be averaged within equal patterns.
struct BoundaryPattern {
  std::vector<bool> mask;

  bool operator==(const BoundaryPattern&) const = default;
  auto operator<=>(const BoundaryPattern&) const = default;
};

BoundaryPattern boundary_pattern(const DenseMatrix& patch_matrix);

/// Group patch indices by boundary pattern. Groups are ordered by first
/// occurrence so downstream budget splits are deterministic.
std::vector<std::pair<BoundaryPattern, std::vector<Index>>> boundary_partition(
    std::span<const DenseMatrix> patch_matrices);

/// JSON export: {"p_s": ..., "patches": [[ids], ...]}.
void write_patchset_json(const PatchSet& ps, const std::string& path);

}  // namespace patchdb
