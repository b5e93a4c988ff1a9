#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "core/dense.hpp"
#include "core/patch.hpp"

namespace patchdb {

enum class Flavor { Spectral, EntrywiseL1 };
enum class KmeansVariant { Entrywise, Spectral, VarianceMinimizing };

struct DatabaseEntry {
  DenseMatrix representative;
  DenseFactor factor;
};

/// The factorization database B together with the assignment map phi.
/// phi is total over the patches and onto the entries.
struct Database {
  std::vector<DatabaseEntry> entries;
  std::vector<Index> phi;  // patch index -> database index
  std::string method;
  double eps = 0.0;  // tolerance used, when built by the greedy pass
  std::vector<BoundaryPattern> entry_patterns;  // per entry, set by partitioned builds

  Index size() const { return static_cast<Index>(entries.size()); }
  Index n_patches() const { return static_cast<Index>(phi.size()); }
  bool phi_onto() const;
};

/// One lossless entry per patch, identity phi.
Database exact_database(std::span<const DenseMatrix> patches, int threads = 1);

/// Single-pass tolerance matching: each patch takes the first database
/// entry within eps (in the chosen flavor) or is appended as a new entry.
/// With best_match, the closest entry below eps is taken instead.
Database greedy_tolerance(std::span<const DenseMatrix> patches, double eps, Flavor flavor,
                          bool best_match = false, int threads = 1);

/// Same pass, but gives up (returns nullopt) as soon as the database would
/// exceed abort_above entries. Used by the size-targeting bisection so
/// probes at too-small tolerances stay cheap.
std::optional<Database> greedy_tolerance_capped(std::span<const DenseMatrix> patches, double eps, Flavor flavor,
                                                Index abort_above, bool best_match = false, int threads = 1);

/// Lloyd-style clustering with a fixed database size. Entrywise and
/// Spectral recompute representatives as entrywise cluster means; the
/// variance-minimizing variant picks the member minimizing the summed
/// squared spectral distance over its cluster. Empty clusters are reseeded
/// with the patch farthest from its current representative.
Database kmeans(std::span<const DenseMatrix> patches, Index m_p, KmeansVariant variant, std::uint64_t seed,
                int max_iters = 50, int threads = 1);

/// Clustering initialized from the greedy pass (spectral flavor); empty
/// clusters are pruned rather than reseeded, so the final size never
/// exceeds the greedy size.
Database bootstrapped(std::span<const DenseMatrix> patches, double eps, KmeansVariant variant, int max_iters = 50,
                      int threads = 1);

/// Split the cluster budget across boundary-pattern partitions
/// proportionally to their sizes (largest remainder, at least one each),
/// cluster each partition independently, and concatenate the results.
Database partitioned_build(std::span<const DenseMatrix> patches, Index m_p, KmeansVariant variant,
                           std::uint64_t seed, int max_iters = 50, int threads = 1);

/// Budget split used by partitioned_build, exposed for testing.
std::vector<Index> split_budget(Index m_p, std::span<const Index> partition_sizes);

/// L(B, phi) = beta * |B| + sum_k ||I - A_k B_phi(k)^{-1}||_2^2.
double evaluate_objective(const Database& db, std::span<const DenseMatrix> patches, double beta, int threads = 1);

struct CurvePoint {
  double eps;
  Index db_size;
  double ratio;  // (n_p - m_p) / n_p
};

/// Greedy compression swept over a tolerance grid.
std::vector<CurvePoint> compressibility_curve(std::span<const DenseMatrix> patches, std::span<const double> eps_grid,
                                              Flavor flavor, int threads = 1);

/// JSON index (method, eps, phi, per-entry partition masks, shapes) plus a
/// raw row-major binary dump of the representatives.
void export_database(const Database& db, const std::string& json_path, const std::string& bin_path);

}  // namespace patchdb
