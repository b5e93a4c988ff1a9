#include "core/patch.hpp"

#include <algorithm>
#include <fstream>
#include <unordered_set>

#include "core/errors.hpp"
#include "core/parallel.hpp"

namespace patchdb {

std::vector<double> compute_weights(Index n, const std::vector<std::vector<Index>>& patches) {
  std::vector<Index> cover(static_cast<std::size_t>(n), 0);
  for (const auto& patch : patches)
    for (Index i : patch) ++cover[static_cast<std::size_t>(i)];
  std::vector<double> w(static_cast<std::size_t>(n), 0.0);
  for (Index i = 0; i < n; ++i)
    if (cover[static_cast<std::size_t>(i)] > 0) w[static_cast<std::size_t>(i)] = 1.0 / static_cast<double>(cover[static_cast<std::size_t>(i)]);
  return w;
}

namespace {

struct IndexVectorHash {
  std::size_t operator()(const std::vector<Index>& v) const {
    std::size_t h = 1469598103934665603ull;
    for (Index x : v) {
      h ^= static_cast<std::size_t>(x);
      h *= 1099511628211ull;
    }
    return h;
  }
};

}  // namespace

PatchSet detect_patches(const SparseMatrix& a, Index patch_size) {
  require(patch_size >= 2, Errc::invalid_argument, "patch size must be >= 2");

  std::vector<bool> candidate(static_cast<std::size_t>(a.n), false);
  bool any_candidate = false;
  for (Index i = 0; i < a.n; ++i)
    if (a.row_nnz(i) == patch_size) {
      candidate[static_cast<std::size_t>(i)] = true;
      any_candidate = true;
    }
  if (!any_candidate)
    fail(Errc::no_patches_found, "no row has exactly " + std::to_string(patch_size) + " stored entries");

  // Candidate footprint of a row: its column set restricted to candidates.
  auto candidate_footprint = [&](Index row, std::vector<Index>& out) {
    out.clear();
    for (Index c : a.row_cols(row))
      if (candidate[static_cast<std::size_t>(c)]) out.push_back(c);
  };

  std::unordered_set<std::vector<Index>, IndexVectorHash> emitted;
  std::vector<std::vector<Index>> patches;
  std::vector<Index> footprint_i, footprint_j;
  for (Index i = 0; i < a.n; ++i) {
    if (!candidate[static_cast<std::size_t>(i)]) continue;
    const auto cols = a.row_cols(i);
    std::vector<Index> set(cols.begin(), cols.end());  // CSR columns are already sorted
    if (emitted.contains(set)) continue;

    candidate_footprint(i, footprint_i);
    bool consistent = true;
    for (Index j : set) {
      if (!candidate[static_cast<std::size_t>(j)] || j == i) continue;
      candidate_footprint(j, footprint_j);
      if (footprint_j != footprint_i) {
        consistent = false;
        break;
      }
    }
    if (!consistent) continue;
    emitted.insert(set);
    patches.push_back(std::move(set));
  }
  if (patches.empty()) fail(Errc::no_patches_found, "no consistent patch candidates detected");

  std::sort(patches.begin(), patches.end(),
            [](const std::vector<Index>& x, const std::vector<Index>& y) { return x.front() < y.front(); });

  PatchSet ps;
  ps.patch_size = patch_size;
  ps.weights = compute_weights(a.n, patches);
  ps.patches = std::move(patches);
  return ps;
}

std::vector<DenseMatrix> extract_all(const SparseMatrix& a, const PatchSet& ps, int threads) {
  std::vector<DenseMatrix> out(static_cast<std::size_t>(ps.count()));
  parallel_for(ps.count(), threads, [&](Index b, Index e) {
    for (Index k = b; k < e; ++k)
      out[static_cast<std::size_t>(k)] = extract_submatrix(a, ps.patches[static_cast<std::size_t>(k)]);
  });
  return out;
}

BoundaryPattern boundary_pattern(const DenseMatrix& patch_matrix) {
  BoundaryPattern bp;
  bp.mask.resize(static_cast<std::size_t>(patch_matrix.rows));
  for (Index i = 0; i < patch_matrix.rows; ++i) {
    Index nonzeros = 0;
    for (Index j = 0; j < patch_matrix.cols; ++j)
      if (patch_matrix(i, j) != 0.0) ++nonzeros;
    bp.mask[static_cast<std::size_t>(i)] = nonzeros == 1;
  }
  return bp;
}

std::vector<std::pair<BoundaryPattern, std::vector<Index>>> boundary_partition(
    std::span<const DenseMatrix> patch_matrices) {
  require(!patch_matrices.empty(), Errc::invalid_argument, "boundary_partition needs at least one patch");
  std::vector<std::pair<BoundaryPattern, std::vector<Index>>> groups;
  for (Index k = 0; k < static_cast<Index>(patch_matrices.size()); ++k) {
    const BoundaryPattern bp = boundary_pattern(patch_matrices[static_cast<std::size_t>(k)]);
    auto it = std::find_if(groups.begin(), groups.end(), [&](const auto& g) { return g.first == bp; });
    if (it == groups.end())
      groups.emplace_back(bp, std::vector<Index>{k});
    else
      it->second.push_back(k);
  }
  return groups;
}

void write_patchset_json(const PatchSet& ps, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(Errc::io_error, "cannot open '" + path + "' for writing");
  out << "{\n  \"p_s\": " << ps.patch_size << ",\n  \"patches\": [";
  for (std::size_t k = 0; k < ps.patches.size(); ++k) {
    out << (k == 0 ? "\n    [" : ",\n    [");
    const auto& p = ps.patches[k];
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (i) out << ", ";
      out << p[i];
    }
    out << "]";
  }
  out << "\n  ]\n}\n";
  if (!out) fail(Errc::io_error, "error while writing '" + path + "'");
}

}  // namespace patchdb
