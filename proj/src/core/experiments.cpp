#include "core/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>

#include <json.hpp>

#include "core/errors.hpp"
#include "core/matrix_market.hpp"
#include "core/precond.hpp"

namespace patchdb {

using nlohmann::json;

namespace {

template <typename T>
void read_field(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

double now_seconds() {
  return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch()).count();
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string format_seconds(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text) {
  ExperimentConfig cfg;
  if (json_text.empty()) return cfg;
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    fail(Errc::parse_error, std::string("config: ") + e.what());
  }
  require(j.is_object(), Errc::parse_error, "config must be a JSON object");

  read_field(j, "experiment", cfg.experiment);
  read_field(j, "dim", cfg.dim);
  read_field(j, "cells", cfg.cells);
  read_field(j, "degrees", cfg.degrees);
  read_field(j, "degree", cfg.degree);
  if (j.contains("coefficient")) {
    const json& c = j.at("coefficient");
    read_field(c, "kind", cfg.coefficient_kind);
    read_field(c, "value", cfg.coefficient_value);
    if (c.contains("blocks")) {
      const auto blocks = c.at("blocks").get<std::vector<Index>>();
      require(blocks.size() == 2, Errc::parse_error, "coefficient.blocks must have two entries");
      cfg.blocks_x = blocks[0];
      cfg.blocks_y = blocks[1];
    }
    read_field(c, "values", cfg.block_values);
  }
  read_field(j, "methods", cfg.methods);
  read_field(j, "db_sizes", cfg.db_sizes);
  read_field(j, "eps", cfg.eps);
  read_field(j, "eps_grid", cfg.eps_grid);
  read_field(j, "flavor", cfg.flavor);
  read_field(j, "best_match", cfg.best_match);
  read_field(j, "kmeans_max_iters", cfg.kmeans_max_iters);
  read_field(j, "matrix", cfg.matrix_path);
  read_field(j, "patch_size", cfg.patch_size);
  read_field(j, "seed", cfg.seed);
  read_field(j, "restart", cfg.restart);
  read_field(j, "tol", cfg.tol);
  read_field(j, "max_iters", cfg.max_iters);
  read_field(j, "left_precond", cfg.left_precond);
  read_field(j, "omega", cfg.omega);
  read_field(j, "threads", cfg.threads);
  read_field(j, "applies", cfg.applies);
  read_field(j, "residuals_out", cfg.residuals_out);
  read_field(j, "patches_out", cfg.patches_out);
  read_field(j, "db_out_json", cfg.db_out_json);
  read_field(j, "db_out_bin", cfg.db_out_bin);
  return cfg;
}

std::string canonical_json(const ExperimentConfig& cfg) {
  json j;
  j["experiment"] = cfg.experiment;
  j["dim"] = cfg.dim;
  j["cells"] = cfg.cells;
  j["degrees"] = cfg.degrees;
  j["degree"] = cfg.degree;
  j["coefficient"] = {{"kind", cfg.coefficient_kind},
                      {"value", cfg.coefficient_value},
                      {"blocks", {cfg.blocks_x, cfg.blocks_y}},
                      {"values", cfg.block_values}};
  j["methods"] = cfg.methods;
  j["db_sizes"] = cfg.db_sizes;
  j["eps"] = cfg.eps;
  j["eps_grid"] = cfg.eps_grid;
  j["flavor"] = cfg.flavor;
  j["best_match"] = cfg.best_match;
  j["kmeans_max_iters"] = cfg.kmeans_max_iters;
  j["matrix"] = cfg.matrix_path;
  j["patch_size"] = cfg.patch_size;
  j["seed"] = cfg.seed;
  j["restart"] = cfg.restart;
  j["tol"] = cfg.tol;
  j["max_iters"] = cfg.max_iters;
  j["left_precond"] = cfg.left_precond;
  j["omega"] = cfg.omega;
  j["applies"] = cfg.applies;
  return j.dump();
}

std::string config_hash(const ExperimentConfig& cfg) {
  const std::string s = canonical_json(cfg);
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

Coefficient resolve_coefficient(const ExperimentConfig& cfg, CoeffKind fallback) {
  std::string kind = cfg.coefficient_kind;
  if (kind.empty()) {
    switch (fallback) {
      case CoeffKind::Smooth:
        kind = "smooth";
        break;
      case CoeffKind::PiecewiseConstant:
        kind = "piecewise";
        break;
      case CoeffKind::Constant:
        kind = "constant";
        break;
    }
  }
  if (kind == "smooth") return Coefficient::smooth();
  if (kind == "constant") return Coefficient::constant(cfg.coefficient_value);
  if (kind == "piecewise") {
    if (cfg.block_values.empty()) return Coefficient::checkerboard(cfg.blocks_x, cfg.blocks_y, 1.0, 100.0);
    Coefficient c;
    c.kind = CoeffKind::PiecewiseConstant;
    c.blocks_x = cfg.blocks_x;
    c.blocks_y = cfg.blocks_y;
    c.block_values = cfg.block_values;
    return c;
  }
  fail(Errc::invalid_argument, "unknown coefficient kind '" + kind + "'");
}

GreedyBisectResult greedy_bisect_to_size(std::span<const DenseMatrix> patches, Flavor flavor, Index target_lo,
                                         Index target_hi, bool best_match, int threads) {
  const Index n_p = static_cast<Index>(patches.size());
  target_lo = std::max<Index>(1, std::min(target_lo, n_p));
  target_hi = std::max(target_lo, std::min(target_hi, n_p));

  // The database size is (for a fixed patch order) nonincreasing in the
  // tolerance; bisect on log eps. Probes whose database would overflow the
  // band abort early, which keeps small-tolerance probes cheap.
  double lo = 1e-14, hi = 1e10;
  GreedyBisectResult best;
  Index best_gap = std::numeric_limits<Index>::max();

  for (int it = 0; it < 60; ++it) {
    const double eps = std::sqrt(lo * hi);
    std::optional<Database> db = greedy_tolerance_capped(patches, eps, flavor, target_hi, best_match, threads);
    if (!db.has_value()) {
      lo = eps;  // too many entries: tolerance too small
      continue;
    }
    const Index size = db->size();
    const Index gap = size < target_lo ? target_lo - size : (size > target_hi ? size - target_hi : 0);
    if (gap < best_gap) {
      best_gap = gap;
      best.db = std::move(*db);
      best.eps = eps;
      if (gap == 0) return best;
    }
    if (size < target_lo)
      hi = eps;  // too few entries: tolerance too large
    else
      lo = eps;
  }
  require(best_gap != std::numeric_limits<Index>::max(), Errc::invalid_argument,
          "greedy bisection found no database");
  return best;
}

namespace {

struct AssembledLevel {
  DiscreteProblem problem;
  PatchSet patches;
  std::vector<DenseMatrix> patch_matrices;
  TransferOp p0;
  BandedFactor coarse;
};

AssembledLevel prepare_level(const ExperimentConfig& cfg, int degree, const Coefficient& coeff) {
  AssembledLevel lvl;
  StructuredMesh mesh{2, cfg.cells, degree};
  lvl.problem = assemble(mesh, coeff);
  const Index p_s = static_cast<Index>((degree + 1) * (degree + 1));
  lvl.patches = detect_patches(lvl.problem.matrix, p_s);
  lvl.patch_matrices = extract_all(lvl.problem.matrix, lvl.patches, cfg.threads);
  CoarseSpace cs = build_coarse_and_transfer(mesh, lvl.problem.matrix);
  lvl.p0 = std::move(cs.p0);
  lvl.coarse = band_factor(cs.coarse_matrix);
  return lvl;
}

KmeansVariant variant_from_method(const std::string& method) {
  if (method == "kmeans-entrywise") return KmeansVariant::Entrywise;
  if (method == "kmeans-spectral") return KmeansVariant::Spectral;
  if (method == "kmeans-varmin") return KmeansVariant::VarianceMinimizing;
  fail(Errc::invalid_argument, "unknown method '" + method + "'");
}

}  // namespace

std::vector<ExperimentRow> run_experiment(const ExperimentConfig& cfg) {
  require(cfg.dim == 2, Errc::invalid_argument, "experiments are defined on 2D meshes");
  require(cfg.experiment == 1 || cfg.experiment == 2, Errc::invalid_argument, "experiment id must be 1 or 2");
  const Coefficient coeff =
      resolve_coefficient(cfg, cfg.experiment == 1 ? CoeffKind::Smooth : CoeffKind::PiecewiseConstant);

  const GmresOptions solver{cfg.restart, cfg.tol, cfg.max_iters, cfg.left_precond, cfg.threads};

  std::vector<ExperimentRow> rows;
  for (int p : cfg.degrees) {
    const AssembledLevel lvl = prepare_level(cfg, p, coeff);
    const Index n_p = lvl.patches.count();

    for (const std::string& method : cfg.methods) {
      const std::vector<Index> targets = method == "full" ? std::vector<Index>{n_p} : cfg.db_sizes;
      for (Index target : targets) {
        ExperimentRow row;
        row.p = p;
        row.method = method;
        row.target_db_size = std::min(target, n_p);
        try {
          PatchPreconditioner patch_pc = [&]() {
            if (method == "full")
              return PatchPreconditioner::exact(lvl.problem.matrix, lvl.patches, cfg.omega, cfg.threads);
            Database db;
            if (method == "greedy" || method == "greedy-l1") {
              const Flavor flavor = method == "greedy" ? Flavor::Spectral : Flavor::EntrywiseL1;
              const Index lo = std::max<Index>(1, static_cast<Index>(std::floor(0.9 * static_cast<double>(row.target_db_size))));
              const Index hi = static_cast<Index>(std::ceil(1.1 * static_cast<double>(row.target_db_size)));
              db = greedy_bisect_to_size(lvl.patch_matrices, flavor, lo, hi, cfg.best_match, cfg.threads).db;
            } else if (method == "bootstrap") {
              const Index lo = std::max<Index>(1, static_cast<Index>(std::floor(0.9 * static_cast<double>(row.target_db_size))));
              const Index hi = static_cast<Index>(std::ceil(1.1 * static_cast<double>(row.target_db_size)));
              const GreedyBisectResult seed_db =
                  greedy_bisect_to_size(lvl.patch_matrices, Flavor::Spectral, lo, hi, cfg.best_match, cfg.threads);
              db = bootstrapped(lvl.patch_matrices, seed_db.eps, KmeansVariant::VarianceMinimizing,
                                cfg.kmeans_max_iters, cfg.threads);
            } else {
              db = partitioned_build(lvl.patch_matrices, row.target_db_size, variant_from_method(method), cfg.seed,
                                     cfg.kmeans_max_iters, cfg.threads);
            }
            row.actual_db_size = db.size();
            return PatchPreconditioner::compressed(lvl.patches, std::move(db), cfg.omega, cfg.threads);
          }();
          if (method == "full") row.actual_db_size = n_p;

          ComboPreconditioner combo(std::move(patch_pc), lvl.p0, lvl.coarse);
          GmresResult sol = gmres(lvl.problem.matrix, lvl.problem.rhs, &combo, solver);
          row.iterations = sol.report.iterations;
          row.converged = sol.report.converged;
          row.final_relres = sol.report.final_relative_residual;
          row.residual_history = std::move(sol.report.residual_history);
        } catch (const Exception& e) {
          row.error = e.what();
          row.converged = false;
          std::cerr << "experiment row p=" << p << " method=" << method << " target=" << target
                    << " failed: " << e.what() << "\n";
        }
        rows.push_back(std::move(row));
      }
    }
  }
  return rows;
}

void write_experiment_csv(const std::vector<ExperimentRow>& rows, const ExperimentConfig& cfg,
                          const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(Errc::io_error, "cannot open '" + path + "' for writing");
  const std::string hash = config_hash(cfg);
  out << "p,method,target_db_size,actual_db_size,iterations,converged,final_relres,config_hash\n";
  for (const auto& row : rows) {
    out << row.p << ',' << row.method << ',' << row.target_db_size << ',' << row.actual_db_size << ','
        << row.iterations << ',' << (row.converged ? 1 : 0) << ',' << format_double(row.final_relres) << ','
        << hash << '\n';
  }
  if (!out) fail(Errc::io_error, "error while writing '" + path + "'");

  if (!cfg.residuals_out.empty()) {
    std::ofstream res(cfg.residuals_out);
    if (!res) fail(Errc::io_error, "cannot open '" + cfg.residuals_out + "' for writing");
    res << "p,method,target_db_size,iter,residual,config_hash\n";
    for (const auto& row : rows)
      for (std::size_t k = 0; k < row.residual_history.size(); ++k)
        res << row.p << ',' << row.method << ',' << row.target_db_size << ',' << k << ','
            << format_double(row.residual_history[k]) << ',' << hash << '\n';
  }
}

AnalyzeResult run_analyze(const ExperimentConfig& cfg) {
  require(!cfg.matrix_path.empty(), Errc::invalid_argument, "analyze requires a matrix path");
  require(cfg.patch_size >= 2, Errc::invalid_argument, "analyze requires a patch size >= 2");
  const SparseMatrix a = read_matrix_market(cfg.matrix_path);
  const PatchSet ps = detect_patches(a, cfg.patch_size);
  const std::vector<DenseMatrix> mats = extract_all(a, ps, cfg.threads);

  std::vector<double> grid = cfg.eps_grid;
  if (grid.empty())
    for (int k = -16; k <= 4; ++k) grid.push_back(std::pow(10.0, 0.5 * static_cast<double>(k)));

  const Flavor flavor = cfg.flavor == "spectral" ? Flavor::Spectral : Flavor::EntrywiseL1;

  AnalyzeResult result;
  result.curve = compressibility_curve(mats, grid, flavor, cfg.threads);

  const Database db = greedy_tolerance(mats, grid.back(), flavor, cfg.best_match, cfg.threads);
  result.histogram.assign(static_cast<std::size_t>(db.size()), 0);
  for (Index j : db.phi) ++result.histogram[static_cast<std::size_t>(j)];

  if (!cfg.patches_out.empty()) write_patchset_json(ps, cfg.patches_out);
  if (!cfg.db_out_json.empty() && !cfg.db_out_bin.empty()) export_database(db, cfg.db_out_json, cfg.db_out_bin);
  return result;
}

void write_analyze_csv(const AnalyzeResult& result, const ExperimentConfig& cfg, const std::string& curve_path,
                       const std::string& histogram_path) {
  const std::string hash = config_hash(cfg);
  {
    std::ofstream out(curve_path);
    if (!out) fail(Errc::io_error, "cannot open '" + curve_path + "' for writing");
    out << "eps,db_size,ratio,config_hash\n";
    for (const auto& pt : result.curve)
      out << format_double(pt.eps) << ',' << pt.db_size << ',' << format_double(pt.ratio) << ',' << hash << '\n';
  }
  {
    std::ofstream out(histogram_path);
    if (!out) fail(Errc::io_error, "cannot open '" + histogram_path + "' for writing");
    out << "entry,count,config_hash\n";
    for (std::size_t j = 0; j < result.histogram.size(); ++j)
      out << j << ',' << result.histogram[j] << ',' << hash << '\n';
  }
}

std::uint64_t factor_storage_bytes(Index stored_factors, Index patch_size) {
  return static_cast<std::uint64_t>(stored_factors) * static_cast<std::uint64_t>(patch_size) *
         static_cast<std::uint64_t>(patch_size) * 8ull;
}

std::uint64_t database_storage_bytes(Index m_p, Index n_p, Index patch_size) {
  return factor_storage_bytes(m_p, patch_size) + static_cast<std::uint64_t>(n_p) * 8ull;
}

std::vector<BenchmarkRow> run_benchmark(const ExperimentConfig& cfg) {
  require(cfg.dim == 2 || cfg.dim == 3, Errc::invalid_argument, "benchmark dimension must be 2 or 3");
  const Coefficient coeff = resolve_coefficient(cfg, CoeffKind::Constant);
  StructuredMesh mesh{cfg.dim, cfg.cells, cfg.degree};
  const DiscreteProblem prob = assemble(mesh, coeff);
  Index p_s = 1;
  for (int d = 0; d < cfg.dim; ++d) p_s *= cfg.degree + 1;
  const PatchSet ps = detect_patches(prob.matrix, p_s);
  const Index n_p = ps.count();

  std::vector<BenchmarkRow> rows;

  // Exact mode: factor every patch.
  double t0 = now_seconds();
  const PatchPreconditioner exact_pc = PatchPreconditioner::exact(prob.matrix, ps, cfg.omega, cfg.threads);
  double setup_exact = now_seconds() - t0;

  // Compressed mode: greedy entrywise-l1 pass, then reuse stored factors.
  t0 = now_seconds();
  const std::vector<DenseMatrix> mats = extract_all(prob.matrix, ps, cfg.threads);
  Database db = greedy_tolerance(mats, cfg.eps, Flavor::EntrywiseL1, cfg.best_match, cfg.threads);
  const Index m_p = db.size();
  const PatchPreconditioner comp_pc = PatchPreconditioner::compressed(ps, std::move(db), cfg.omega, cfg.threads);
  double setup_comp = now_seconds() - t0;

  std::vector<double> z(static_cast<std::size_t>(prob.matrix.n));
  t0 = now_seconds();
  for (Index k = 0; k < cfg.applies; ++k) exact_pc.apply(prob.rhs, z);
  const double apply_exact = now_seconds() - t0;
  t0 = now_seconds();
  for (Index k = 0; k < cfg.applies; ++k) comp_pc.apply(prob.rhs, z);
  const double apply_comp = now_seconds() - t0;

  rows.push_back({"exact", n_p, n_p, p_s, setup_exact, apply_exact, factor_storage_bytes(n_p, p_s)});
  rows.push_back({"compressed", n_p, m_p, p_s, setup_comp, apply_comp, database_storage_bytes(m_p, n_p, p_s)});
  return rows;
}

void write_benchmark_csv(const std::vector<BenchmarkRow>& rows, const ExperimentConfig& cfg,
                         const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(Errc::io_error, "cannot open '" + path + "' for writing");
  const std::string hash = config_hash(cfg);
  out << "mode,n_p,m_p,p_s,setup_s,apply_s,bytes,config_hash\n";
  for (const auto& row : rows)
    out << row.mode << ',' << row.n_p << ',' << row.m_p << ',' << row.p_s << ',' << format_seconds(row.setup_s)
        << ',' << format_seconds(row.apply_s) << ',' << row.bytes << ',' << hash << '\n';
  if (!out) fail(Errc::io_error, "error while writing '" + path + "'");
}

void export_matrix(const ExperimentConfig& cfg, const std::string& path) {
  const Coefficient coeff = resolve_coefficient(cfg, cfg.experiment == 2 ? CoeffKind::PiecewiseConstant : CoeffKind::Smooth);
  StructuredMesh mesh{cfg.dim, cfg.cells, cfg.degree};
  const DiscreteProblem prob = assemble(mesh, coeff);
  write_matrix_market(prob.matrix, path);
}

}  // namespace patchdb
