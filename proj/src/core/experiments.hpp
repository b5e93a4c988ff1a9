#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "core/compress.hpp"
#include "core/fem.hpp"
#include "core/gmres.hpp"

namespace patchdb {

/// Fully-resolved run configuration shared by the experiment, analyze,
/// benchmark and export commands. Parsed from JSON; unspecified fields keep
/// their defaults. The canonical serialization (and its hash) excludes
/// output paths and the thread count, which must not influence results.
struct ExperimentConfig {
  int experiment = 1;  // 1 smooth coefficient, 2 piecewise constant
  int dim = 2;
  Index cells = 60;
  std::vector<int> degrees = {2, 3, 4, 5};
  int degree = 2;  // single-degree commands (benchmark, export)

  std::string coefficient_kind;  // "", "smooth", "constant", "piecewise"
  double coefficient_value = 1.0;
  Index blocks_x = 4;
  Index blocks_y = 4;
  std::vector<double> block_values;

  std::vector<std::string> methods = {"full", "greedy", "kmeans-entrywise", "kmeans-spectral"};
  std::vector<Index> db_sizes = {74, 35, 18};
  double eps = 1e-7;
  std::vector<double> eps_grid;
  std::string flavor = "l1";  // analyze flavor
  bool best_match = false;
  int kmeans_max_iters = 50;

  std::string matrix_path;  // analyze input
  Index patch_size = 0;     // analyze patch size

  std::uint64_t seed = 42;
  Index restart = 20;
  double tol = 1e-8;
  Index max_iters = 2000;
  bool left_precond = false;
  double omega = 1.0;
  int threads = 1;
  Index applies = 20;  // benchmark preconditioner applications

  std::string residuals_out;
  std::string patches_out;
  std::string db_out_json;
  std::string db_out_bin;
};

ExperimentConfig parse_config(const std::string& json_text);
std::string canonical_json(const ExperimentConfig& cfg);
std::string config_hash(const ExperimentConfig& cfg);

/// Coefficient selection: an explicit coefficient_kind wins, otherwise the
/// experiment id picks smooth (1) or the default checkerboard (2);
/// benchmark and export fall back to the given default kind.
Coefficient resolve_coefficient(const ExperimentConfig& cfg, CoeffKind fallback);

struct ExperimentRow {
  int p = 0;
  std::string method;
  Index target_db_size = 0;
  Index actual_db_size = 0;
  Index iterations = 0;
  bool converged = false;
  double final_relres = 0.0;
  std::string error;  // empty on success
  std::vector<double> residual_history;
};

std::vector<ExperimentRow> run_experiment(const ExperimentConfig& cfg);
void write_experiment_csv(const std::vector<ExperimentRow>& rows, const ExperimentConfig& cfg,
                          const std::string& path);

struct AnalyzeResult {
  std::vector<CurvePoint> curve;
  std::vector<Index> histogram;  // phi occupancy of the largest-tolerance run
};

AnalyzeResult run_analyze(const ExperimentConfig& cfg);
void write_analyze_csv(const AnalyzeResult& result, const ExperimentConfig& cfg, const std::string& curve_path,
                       const std::string& histogram_path);

struct BenchmarkRow {
  std::string mode;  // "exact" or "compressed"
  Index n_p = 0;
  Index m_p = 0;
  Index p_s = 0;
  double setup_s = 0.0;
  double apply_s = 0.0;
  std::uint64_t bytes = 0;
};

std::vector<BenchmarkRow> run_benchmark(const ExperimentConfig& cfg);
void write_benchmark_csv(const std::vector<BenchmarkRow>& rows, const ExperimentConfig& cfg,
                         const std::string& path);

void export_matrix(const ExperimentConfig& cfg, const std::string& path);

/// Storage accounting used by the benchmark rows: factorization bytes plus
/// lookup indices for the compressed mode.
std::uint64_t factor_storage_bytes(Index stored_factors, Index patch_size);
std::uint64_t database_storage_bytes(Index m_p, Index n_p, Index patch_size);

/// Tune the greedy tolerance by bisection until the database size lands in
/// [target_lo, target_hi]; returns the best database found (closest size)
/// along with the tolerance that produced it.
struct GreedyBisectResult {
  Database db;
  double eps = 0.0;
};
GreedyBisectResult greedy_bisect_to_size(std::span<const DenseMatrix> patches, Flavor flavor, Index target_lo,
                                         Index target_hi, bool best_match, int threads);

}  // namespace patchdb
