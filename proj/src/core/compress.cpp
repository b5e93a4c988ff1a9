#include "core/compress.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>

#include "core/errors.hpp"
#include "core/parallel.hpp"

namespace patchdb {

bool Database::phi_onto() const {
  std::vector<bool> hit(entries.size(), false);
  for (Index j : phi) {
    if (j < 0 || j >= size()) return false;
    hit[static_cast<std::size_t>(j)] = true;
  }
  return std::all_of(hit.begin(), hit.end(), [](bool b) { return b; });
}

namespace {

DenseFactor factor_patch(const DenseMatrix& m, Index patch_index) {
  try {
    return lu_factor(m);
  } catch (const Exception& e) {
    if (e.code() == Errc::singular_matrix)
      fail(Errc::singular_matrix, "patch " + std::to_string(patch_index) + ": " + e.what());
    throw;
  }
}

double entry_distance(const DenseMatrix& patch, const DatabaseEntry& entry, Flavor flavor) {
  return flavor == Flavor::Spectral ? spectral_distance(patch, entry.factor)
                                    : entrywise_l1_distance(patch, entry.representative);
}

std::optional<Database> greedy_impl(std::span<const DenseMatrix> patches, double eps, Flavor flavor,
                                    Index abort_above, bool best_match, int threads) {
  require(!patches.empty(), Errc::invalid_argument, "greedy_tolerance needs at least one patch");
  require(eps > 0.0, Errc::invalid_argument, "tolerance must be positive");

  Database db;
  db.method = flavor == Flavor::Spectral ? "greedy" : "greedy-l1";
  db.eps = eps;
  db.phi.assign(patches.size(), -1);

  std::vector<double> dist;
  for (Index i = 0; i < static_cast<Index>(patches.size()); ++i) {
    const DenseMatrix& a = patches[static_cast<std::size_t>(i)];
    const Index m = db.size();
    Index match = -1;
    if (m > 0 && threads > 1) {
      // Evaluate all current entries in parallel, then resolve the match
      // exactly as the sequential scan would.
      dist.assign(static_cast<std::size_t>(m), 0.0);
      parallel_for(m, threads, [&](Index b, Index e) {
        for (Index j = b; j < e; ++j)
          dist[static_cast<std::size_t>(j)] = entry_distance(a, db.entries[static_cast<std::size_t>(j)], flavor);
      });
      if (best_match) {
        double best = eps;
        for (Index j = 0; j < m; ++j)
          if (dist[static_cast<std::size_t>(j)] < best) {
            best = dist[static_cast<std::size_t>(j)];
            match = j;
          }
      } else {
        for (Index j = 0; j < m && match < 0; ++j)
          if (dist[static_cast<std::size_t>(j)] < eps) match = j;
      }
    } else {
      double best = eps;
      for (Index j = 0; j < m; ++j) {
        const double d = entry_distance(a, db.entries[static_cast<std::size_t>(j)], flavor);
        if (d < best) {
          match = j;
          if (!best_match) break;
          best = d;
        }
      }
    }

    if (match >= 0) {
      db.phi[static_cast<std::size_t>(i)] = match;
      continue;
    }
    if (abort_above > 0 && db.size() + 1 > abort_above) return std::nullopt;
    db.entries.push_back({a, factor_patch(a, i)});
    db.phi[static_cast<std::size_t>(i)] = db.size() - 1;
  }
  return db;
}

}  // namespace

Database exact_database(std::span<const DenseMatrix> patches, int threads) {
  require(!patches.empty(), Errc::invalid_argument, "exact_database needs at least one patch");
  Database db;
  db.method = "exact";
  const Index n = static_cast<Index>(patches.size());
  db.entries.resize(static_cast<std::size_t>(n));
  db.phi.resize(static_cast<std::size_t>(n));
  parallel_for(n, threads, [&](Index b, Index e) {
    for (Index i = b; i < e; ++i) {
      db.entries[static_cast<std::size_t>(i)] = {patches[static_cast<std::size_t>(i)],
                                                 factor_patch(patches[static_cast<std::size_t>(i)], i)};
      db.phi[static_cast<std::size_t>(i)] = i;
    }
  });
  return db;
}

Database greedy_tolerance(std::span<const DenseMatrix> patches, double eps, Flavor flavor, bool best_match,
                          int threads) {
  return *greedy_impl(patches, eps, flavor, -1, best_match, threads);
}

std::optional<Database> greedy_tolerance_capped(std::span<const DenseMatrix> patches, double eps, Flavor flavor,
                                                Index abort_above, bool best_match, int threads) {
  return greedy_impl(patches, eps, flavor, abort_above, best_match, threads);
}

namespace {

enum class EmptyPolicy { Reseed, Prune };

double variant_distance(const DenseMatrix& patch, const DatabaseEntry& entry, KmeansVariant variant) {
  return variant == KmeansVariant::Entrywise ? entrywise_l1_distance(patch, entry.representative)
                                             : spectral_distance(patch, entry.factor);
}

/// Shared Lloyd loop. `db` enters with initial representatives (factors
/// already computed where the variant needs them); phi is recomputed from
/// scratch on the first assignment sweep.
void kmeans_loop(std::span<const DenseMatrix> patches, Database& db, KmeansVariant variant, int max_iters,
                 int threads, EmptyPolicy policy) {
  const Index n = static_cast<Index>(patches.size());
  db.phi.assign(static_cast<std::size_t>(n), -1);
  std::vector<double> min_dist(static_cast<std::size_t>(n), 0.0);

  for (int iter = 0; iter < max_iters; ++iter) {
    const Index m = db.size();
    // Assignment sweep; each patch writes only its own slot.
    bool changed = false;
    std::vector<char> changed_flags(static_cast<std::size_t>(n), 0);
    std::vector<Index> new_phi(static_cast<std::size_t>(n));
    parallel_for(n, threads, [&](Index b, Index e) {
      for (Index i = b; i < e; ++i) {
        Index best_j = 0;
        double best = std::numeric_limits<double>::infinity();
        for (Index j = 0; j < m; ++j) {
          const double d = variant_distance(patches[static_cast<std::size_t>(i)],
                                            db.entries[static_cast<std::size_t>(j)], variant);
          if (d < best) {
            best = d;
            best_j = j;
          }
        }
        new_phi[static_cast<std::size_t>(i)] = best_j;
        min_dist[static_cast<std::size_t>(i)] = best;
        if (best_j != db.phi[static_cast<std::size_t>(i)]) changed_flags[static_cast<std::size_t>(i)] = 1;
      }
    });
    for (Index i = 0; i < n; ++i)
      if (changed_flags[static_cast<std::size_t>(i)]) {
        changed = true;
        break;
      }
    db.phi = std::move(new_phi);
    if (!changed) return;

    // Cluster membership in ascending patch order.
    std::vector<std::vector<Index>> members(static_cast<std::size_t>(m));
    for (Index i = 0; i < n; ++i) members[static_cast<std::size_t>(db.phi[static_cast<std::size_t>(i)])].push_back(i);

    if (policy == EmptyPolicy::Prune) {
      std::vector<Index> remap(static_cast<std::size_t>(m), -1);
      Index kept = 0;
      for (Index j = 0; j < m; ++j)
        if (!members[static_cast<std::size_t>(j)].empty()) {
          remap[static_cast<std::size_t>(j)] = kept;
          if (kept != j) {
            db.entries[static_cast<std::size_t>(kept)] = std::move(db.entries[static_cast<std::size_t>(j)]);
            members[static_cast<std::size_t>(kept)] = std::move(members[static_cast<std::size_t>(j)]);
          }
          ++kept;
        }
      db.entries.resize(static_cast<std::size_t>(kept));
      members.resize(static_cast<std::size_t>(kept));
      for (Index i = 0; i < n; ++i)
        db.phi[static_cast<std::size_t>(i)] = remap[static_cast<std::size_t>(db.phi[static_cast<std::size_t>(i)])];
    } else {
      // Reseed each empty cluster with the patch farthest from its current
      // representative; singleton clusters are never robbed.
      for (Index j = 0; j < m; ++j) {
        if (!members[static_cast<std::size_t>(j)].empty()) continue;
        Index far = -1;
        double far_d = -1.0;
        for (Index i = 0; i < n; ++i) {
          const Index owner = db.phi[static_cast<std::size_t>(i)];
          if (members[static_cast<std::size_t>(owner)].size() <= 1) continue;
          if (min_dist[static_cast<std::size_t>(i)] > far_d) {
            far_d = min_dist[static_cast<std::size_t>(i)];
            far = i;
          }
        }
        if (far < 0) continue;  // nothing movable
        const Index owner = db.phi[static_cast<std::size_t>(far)];
        auto& own = members[static_cast<std::size_t>(owner)];
        own.erase(std::find(own.begin(), own.end(), far));
        members[static_cast<std::size_t>(j)].push_back(far);
        db.phi[static_cast<std::size_t>(far)] = j;
        min_dist[static_cast<std::size_t>(far)] = 0.0;
      }
    }

    // Representative update, independent per cluster.
    const Index mc = db.size();
    std::vector<std::string> cluster_errors(static_cast<std::size_t>(mc));
    parallel_for(mc, threads, [&](Index b, Index e) {
      for (Index j = b; j < e; ++j) {
        const auto& mem = members[static_cast<std::size_t>(j)];
        try {
          if (variant == KmeansVariant::VarianceMinimizing) {
            Index best_c = -1;
            double best_var = std::numeric_limits<double>::infinity();
            DenseFactor best_factor;
            for (Index c : mem) {
              DenseFactor f = factor_patch(patches[static_cast<std::size_t>(c)], c);
              double var = 0.0;
              for (Index k : mem) {
                const double d = spectral_distance(patches[static_cast<std::size_t>(k)], f);
                var += d * d;
              }
              if (var < best_var) {
                best_var = var;
                best_c = c;
                best_factor = std::move(f);
              }
            }
            db.entries[static_cast<std::size_t>(j)] = {patches[static_cast<std::size_t>(best_c)],
                                                       std::move(best_factor)};
          } else {
            DenseMatrix mean = entrywise_mean_indexed(patches, mem);
            DenseFactor f;
            if (variant == KmeansVariant::Spectral) f = lu_factor(mean);
            db.entries[static_cast<std::size_t>(j)] = {std::move(mean), std::move(f)};
          }
        } catch (const Exception& ex) {
          cluster_errors[static_cast<std::size_t>(j)] = ex.what();
        }
      }
    });
    for (Index j = 0; j < mc; ++j)
      if (!cluster_errors[static_cast<std::size_t>(j)].empty())
        fail(Errc::singular_matrix,
             "cluster " + std::to_string(j) + ": " + cluster_errors[static_cast<std::size_t>(j)]);
  }
}

/// Entrywise clusters carry mean matrices without factors during the loop;
/// the final database needs a factor for every entry.
void finalize_factors(Database& db) {
  for (Index j = 0; j < db.size(); ++j) {
    auto& entry = db.entries[static_cast<std::size_t>(j)];
    if (entry.factor.dim == entry.representative.rows && entry.factor.dim > 0) continue;
    try {
      entry.factor = lu_factor(entry.representative);
    } catch (const Exception& e) {
      if (e.code() == Errc::singular_matrix)
        fail(Errc::singular_matrix, "cluster " + std::to_string(j) + ": " + e.what());
      throw;
    }
  }
}

std::string variant_name(KmeansVariant v) {
  switch (v) {
    case KmeansVariant::Entrywise:
      return "kmeans-entrywise";
    case KmeansVariant::Spectral:
      return "kmeans-spectral";
    case KmeansVariant::VarianceMinimizing:
      return "kmeans-varmin";
  }
  return "kmeans";
}

}  // namespace

Database kmeans(std::span<const DenseMatrix> patches, Index m_p, KmeansVariant variant, std::uint64_t seed,
                int max_iters, int threads) {
  const Index n = static_cast<Index>(patches.size());
  require(n >= 1, Errc::invalid_argument, "kmeans needs at least one patch");
  require(m_p >= 1 && m_p <= n, Errc::invalid_argument, "kmeans requires 1 <= m_p <= n_p");

  // Seeded partial Fisher-Yates; raw mt19937_64 draws keep the selection
  // identical across platforms.
  std::mt19937_64 rng(seed);
  std::vector<Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Index{0});
  for (Index i = 0; i < m_p; ++i) {
    const Index j = i + static_cast<Index>(rng() % static_cast<std::uint64_t>(n - i));
    std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
  }

  Database db;
  db.method = variant_name(variant);
  db.entries.reserve(static_cast<std::size_t>(m_p));
  for (Index j = 0; j < m_p; ++j) {
    const Index pick = perm[static_cast<std::size_t>(j)];
    DatabaseEntry entry;
    entry.representative = patches[static_cast<std::size_t>(pick)];
    if (variant != KmeansVariant::Entrywise) entry.factor = factor_patch(entry.representative, pick);
    db.entries.push_back(std::move(entry));
  }

  kmeans_loop(patches, db, variant, max_iters, threads, EmptyPolicy::Reseed);
  finalize_factors(db);
  return db;
}

Database bootstrapped(std::span<const DenseMatrix> patches, double eps, KmeansVariant variant, int max_iters,
                      int threads) {
  Database db = greedy_tolerance(patches, eps, Flavor::Spectral, false, threads);
  db.method = "bootstrap-" + variant_name(variant);
  db.eps = eps;
  kmeans_loop(patches, db, variant, max_iters, threads, EmptyPolicy::Prune);
  finalize_factors(db);
  return db;
}

std::vector<Index> split_budget(Index m_p, std::span<const Index> partition_sizes) {
  const Index parts = static_cast<Index>(partition_sizes.size());
  require(parts >= 1, Errc::invalid_argument, "no partitions");
  Index total = 0;
  for (Index s : partition_sizes) total += s;
  require(m_p >= parts, Errc::budget_too_small,
          "database budget smaller than the number of boundary partitions");
  require(m_p <= total, Errc::invalid_argument, "database budget larger than the number of patches");

  std::vector<Index> alloc(static_cast<std::size_t>(parts), 0);
  std::vector<double> remainder(static_cast<std::size_t>(parts), 0.0);
  Index assigned = 0;
  for (Index p = 0; p < parts; ++p) {
    const double quota = static_cast<double>(m_p) * static_cast<double>(partition_sizes[static_cast<std::size_t>(p)]) /
                         static_cast<double>(total);
    alloc[static_cast<std::size_t>(p)] = static_cast<Index>(std::floor(quota));
    remainder[static_cast<std::size_t>(p)] = quota - std::floor(quota);
    assigned += alloc[static_cast<std::size_t>(p)];
  }
  // Hand out the leftover by largest remainder, ties to the earlier group.
  std::vector<Index> order(static_cast<std::size_t>(parts));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index x, Index y) {
    return remainder[static_cast<std::size_t>(x)] > remainder[static_cast<std::size_t>(y)];
  });
  for (Index k = 0; assigned < m_p; ++k) {
    ++alloc[static_cast<std::size_t>(order[static_cast<std::size_t>(k % parts)])];
    ++assigned;
  }
  // Repair: every partition gets at least one cluster and at most its size.
  auto take_from_largest = [&](Index needy) {
    Index donor = -1;
    for (Index p = 0; p < parts; ++p)
      if (alloc[static_cast<std::size_t>(p)] >= 2 && (donor < 0 || alloc[static_cast<std::size_t>(p)] > alloc[static_cast<std::size_t>(donor)]))
        donor = p;
    require(donor >= 0, Errc::budget_too_small, "cannot satisfy one cluster per partition");
    --alloc[static_cast<std::size_t>(donor)];
    ++alloc[static_cast<std::size_t>(needy)];
  };
  for (Index p = 0; p < parts; ++p)
    while (alloc[static_cast<std::size_t>(p)] == 0) take_from_largest(p);
  for (Index p = 0; p < parts; ++p)
    while (alloc[static_cast<std::size_t>(p)] > partition_sizes[static_cast<std::size_t>(p)]) {
      --alloc[static_cast<std::size_t>(p)];
      Index receiver = -1;
      double best_rem = -1.0;
      for (Index q = 0; q < parts; ++q)
        if (alloc[static_cast<std::size_t>(q)] < partition_sizes[static_cast<std::size_t>(q)] &&
            remainder[static_cast<std::size_t>(q)] > best_rem) {
          best_rem = remainder[static_cast<std::size_t>(q)];
          receiver = q;
        }
      require(receiver >= 0, Errc::invalid_argument, "budget exceeds total patch count");
      ++alloc[static_cast<std::size_t>(receiver)];
    }
  return alloc;
}

Database partitioned_build(std::span<const DenseMatrix> patches, Index m_p, KmeansVariant variant,
                           std::uint64_t seed, int max_iters, int threads) {
  const auto groups = boundary_partition(patches);
  std::vector<Index> sizes;
  sizes.reserve(groups.size());
  for (const auto& g : groups) sizes.push_back(static_cast<Index>(g.second.size()));
  const std::vector<Index> alloc = split_budget(m_p, sizes);

  Database out;
  out.method = variant_name(variant) + "-partitioned";
  out.phi.assign(patches.size(), -1);
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const auto& member_ids = groups[g].second;
    std::vector<DenseMatrix> sub;
    sub.reserve(member_ids.size());
    for (Index k : member_ids) sub.push_back(patches[static_cast<std::size_t>(k)]);

    const Database part = kmeans(sub, alloc[g], variant, seed + static_cast<std::uint64_t>(g), max_iters, threads);
    const Index offset = out.size();
    for (const auto& entry : part.entries) {
      out.entries.push_back(entry);
      out.entry_patterns.push_back(groups[g].first);
    }
    for (std::size_t local = 0; local < member_ids.size(); ++local)
      out.phi[static_cast<std::size_t>(member_ids[local])] = offset + part.phi[local];
  }
  return out;
}

double evaluate_objective(const Database& db, std::span<const DenseMatrix> patches, double beta, int threads) {
  require(beta > 0.0, Errc::invalid_argument, "beta must be positive");
  require(db.n_patches() == static_cast<Index>(patches.size()), Errc::dimension_mismatch,
          "database does not match the patch list");
  const Index n = static_cast<Index>(patches.size());
  std::vector<double> terms(static_cast<std::size_t>(n), 0.0);
  parallel_for(n, threads, [&](Index b, Index e) {
    for (Index k = b; k < e; ++k) {
      const double d = spectral_distance(patches[static_cast<std::size_t>(k)],
                                         db.entries[static_cast<std::size_t>(db.phi[static_cast<std::size_t>(k)])].factor);
      terms[static_cast<std::size_t>(k)] = d * d;
    }
  });
  double sum = 0.0;
  for (double t : terms) sum += t;
  return beta * static_cast<double>(db.size()) + sum;
}

std::vector<CurvePoint> compressibility_curve(std::span<const DenseMatrix> patches, std::span<const double> eps_grid,
                                              Flavor flavor, int threads) {
  require(!eps_grid.empty(), Errc::invalid_argument, "empty tolerance grid");
  for (std::size_t k = 0; k < eps_grid.size(); ++k) {
    require(eps_grid[k] > 0.0, Errc::invalid_argument, "tolerances must be positive");
    if (k > 0) require(eps_grid[k] > eps_grid[k - 1], Errc::invalid_argument, "tolerance grid must be ascending");
  }
  const double n_p = static_cast<double>(patches.size());
  std::vector<CurvePoint> curve;
  curve.reserve(eps_grid.size());
  for (double eps : eps_grid) {
    const Database db = greedy_tolerance(patches, eps, flavor, false, threads);
    curve.push_back({eps, db.size(), (n_p - static_cast<double>(db.size())) / n_p});
  }
  return curve;
}

void export_database(const Database& db, const std::string& json_path, const std::string& bin_path) {
  std::ofstream bin(bin_path, std::ios::binary);
  if (!bin) fail(Errc::io_error, "cannot open '" + bin_path + "' for writing");
  for (const auto& entry : db.entries)
    bin.write(reinterpret_cast<const char*>(entry.representative.a.data()),
              static_cast<std::streamsize>(entry.representative.a.size() * sizeof(double)));
  if (!bin) fail(Errc::io_error, "error while writing '" + bin_path + "'");

  std::ofstream out(json_path);
  if (!out) fail(Errc::io_error, "cannot open '" + json_path + "' for writing");
  out << "{\n  \"method\": \"" << db.method << "\",\n  \"eps\": " << db.eps << ",\n  \"m_p\": " << db.size()
      << ",\n  \"n_p\": " << db.n_patches() << ",\n  \"entries\": [";
  for (Index j = 0; j < db.size(); ++j) {
    const auto& rep = db.entries[static_cast<std::size_t>(j)].representative;
    out << (j == 0 ? "\n    " : ",\n    ");
    out << "{\"rows\": " << rep.rows << ", \"cols\": " << rep.cols;
    if (!db.entry_patterns.empty()) {
      out << ", \"partition\": \"";
      for (bool b : db.entry_patterns[static_cast<std::size_t>(j)].mask) out << (b ? '1' : '0');
      out << "\"";
    }
    out << "}";
  }
  out << "\n  ],\n  \"phi\": [";
  for (Index k = 0; k < db.n_patches(); ++k) out << (k == 0 ? "" : ", ") << db.phi[static_cast<std::size_t>(k)];
  out << "]\n}\n";
  if (!out) fail(Errc::io_error, "error while writing '" + json_path + "'");
}

}  // namespace patchdb
