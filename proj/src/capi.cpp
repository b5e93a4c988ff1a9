#include "patchdb/patchdb.h"

#include <cstring>
#include <memory>
#include <string>

#include "core/compress.hpp"
#include "core/errors.hpp"
#include "core/experiments.hpp"
#include "core/fem.hpp"
#include "core/gmres.hpp"
#include "core/matrix_market.hpp"
#include "core/patch.hpp"
#include "core/precond.hpp"

using namespace patchdb;

struct pdb_matrix_s {
  SparseMatrix m;
};
struct pdb_problem_s {
  DiscreteProblem p;
};
struct pdb_patchset_s {
  PatchSet ps;
};
struct pdb_database_s {
  Database db;
};
struct pdb_precond_s {
  std::unique_ptr<Preconditioner> pc;
};
struct pdb_report_s {
  SolveReport rep;
};

namespace {

thread_local std::string g_last_error;

pdb_status status_from(Errc code) {
  switch (code) {
    case Errc::invalid_argument:
      return PDB_ERR_INVALID_ARGUMENT;
    case Errc::dimension_mismatch:
      return PDB_ERR_DIMENSION_MISMATCH;
    case Errc::singular_matrix:
      return PDB_ERR_SINGULAR_MATRIX;
    case Errc::index_out_of_range:
      return PDB_ERR_INDEX_OUT_OF_RANGE;
    case Errc::duplicate_index:
      return PDB_ERR_DUPLICATE_INDEX;
    case Errc::parse_error:
      return PDB_ERR_PARSE;
    case Errc::non_square_matrix:
      return PDB_ERR_NON_SQUARE_MATRIX;
    case Errc::no_patches_found:
      return PDB_ERR_NO_PATCHES_FOUND;
    case Errc::empty_cluster:
      return PDB_ERR_EMPTY_CLUSTER;
    case Errc::budget_too_small:
      return PDB_ERR_BUDGET_TOO_SMALL;
    case Errc::invalid_degree:
      return PDB_ERR_INVALID_DEGREE;
    case Errc::non_positive_coefficient:
      return PDB_ERR_NON_POSITIVE_COEFFICIENT;
    case Errc::io_error:
      return PDB_ERR_IO;
  }
  return PDB_ERR_INTERNAL;
}

template <typename F>
pdb_status guarded(F&& fn) {
  try {
    fn();
    return PDB_OK;
  } catch (const Exception& e) {
    g_last_error = e.what();
    return status_from(e.code());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return PDB_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return PDB_ERR_INTERNAL;
  }
}

pdb_status arg_error(const char* msg) {
  g_last_error = msg;
  return PDB_ERR_INVALID_ARGUMENT;
}

}  // namespace

extern "C" {

const char* pdb_status_string(pdb_status status) {
  switch (status) {
    case PDB_OK:
      return "ok";
    case PDB_ERR_INVALID_ARGUMENT:
      return "invalid argument";
    case PDB_ERR_DIMENSION_MISMATCH:
      return "dimension mismatch";
    case PDB_ERR_SINGULAR_MATRIX:
      return "singular matrix";
    case PDB_ERR_INDEX_OUT_OF_RANGE:
      return "index out of range";
    case PDB_ERR_DUPLICATE_INDEX:
      return "duplicate index";
    case PDB_ERR_PARSE:
      return "parse error";
    case PDB_ERR_NON_SQUARE_MATRIX:
      return "non-square matrix";
    case PDB_ERR_NO_PATCHES_FOUND:
      return "no patches found";
    case PDB_ERR_EMPTY_CLUSTER:
      return "empty cluster";
    case PDB_ERR_BUDGET_TOO_SMALL:
      return "budget too small";
    case PDB_ERR_INVALID_DEGREE:
      return "invalid degree";
    case PDB_ERR_NON_POSITIVE_COEFFICIENT:
      return "non-positive coefficient";
    case PDB_ERR_IO:
      return "io error";
    case PDB_ERR_INTERNAL:
      return "internal error";
  }
  return "unknown status";
}

const char* pdb_last_error(void) { return g_last_error.c_str(); }

/* ---- matrices ---- */

pdb_status pdb_matrix_read_matrix_market(const char* path, pdb_matrix* out) {
  if (path == nullptr || out == nullptr) return arg_error("null argument");
  return guarded([&] {
    auto handle = std::make_unique<pdb_matrix_s>();
    handle->m = read_matrix_market(path);
    *out = handle.release();
  });
}

pdb_status pdb_matrix_write_matrix_market(pdb_matrix m, const char* path) {
  if (m == nullptr || path == nullptr) return arg_error("null argument");
  return guarded([&] { write_matrix_market(m->m, path); });
}

int64_t pdb_matrix_rows(pdb_matrix m) { return m == nullptr ? 0 : m->m.n; }

int64_t pdb_matrix_nnz(pdb_matrix m) { return m == nullptr ? 0 : m->m.nnz(); }

pdb_status pdb_matrix_spmv(pdb_matrix m, const double* x, double* y) {
  if (m == nullptr || x == nullptr || y == nullptr) return arg_error("null argument");
  return guarded([&] {
    const std::size_t n = static_cast<std::size_t>(m->m.n);
    spmv(m->m, {x, n}, {y, n});
  });
}

void pdb_matrix_free(pdb_matrix m) { delete m; }

/* ---- problems ---- */

pdb_status pdb_problem_assemble(const char* config_json, pdb_problem* out) {
  if (config_json == nullptr || out == nullptr) return arg_error("null argument");
  return guarded([&] {
    const ExperimentConfig cfg = parse_config(config_json);
    const Coefficient coeff = resolve_coefficient(cfg, CoeffKind::Constant);
    StructuredMesh mesh{cfg.dim, cfg.cells, cfg.degree};
    auto handle = std::make_unique<pdb_problem_s>();
    handle->p = assemble(mesh, coeff);
    *out = handle.release();
  });
}

int64_t pdb_problem_ndofs(pdb_problem p) { return p == nullptr ? 0 : p->p.matrix.n; }

pdb_status pdb_problem_matrix(pdb_problem p, pdb_matrix* out) {
  if (p == nullptr || out == nullptr) return arg_error("null argument");
  return guarded([&] {
    auto handle = std::make_unique<pdb_matrix_s>();
    handle->m = p->p.matrix;
    *out = handle.release();
  });
}

pdb_status pdb_problem_rhs(pdb_problem p, double* out) {
  if (p == nullptr || out == nullptr) return arg_error("null argument");
  return guarded([&] { std::memcpy(out, p->p.rhs.data(), p->p.rhs.size() * sizeof(double)); });
}

pdb_status pdb_problem_exact_solution(pdb_problem p, double* out) {
  if (p == nullptr || out == nullptr) return arg_error("null argument");
  return guarded([&] {
    const std::vector<double> u = exact_solution(p->p.mesh);
    std::memcpy(out, u.data(), u.size() * sizeof(double));
  });
}

pdb_status pdb_problem_l2_error(pdb_problem p, const double* discrete_solution, double* out) {
  if (p == nullptr || discrete_solution == nullptr || out == nullptr) return arg_error("null argument");
  return guarded([&] {
    *out = l2_error(p->p.mesh, {discrete_solution, static_cast<std::size_t>(p->p.matrix.n)});
  });
}

void pdb_problem_free(pdb_problem p) { delete p; }

/* ---- patch sets ---- */

pdb_status pdb_patchset_detect(pdb_matrix m, int64_t patch_size, pdb_patchset* out) {
  if (m == nullptr || out == nullptr) return arg_error("null argument");
  return guarded([&] {
    auto handle = std::make_unique<pdb_patchset_s>();
    handle->ps = detect_patches(m->m, patch_size);
    *out = handle.release();
  });
}

int64_t pdb_patchset_count(pdb_patchset ps) { return ps == nullptr ? 0 : ps->ps.count(); }

int64_t pdb_patchset_patch_size(pdb_patchset ps) { return ps == nullptr ? 0 : ps->ps.patch_size; }

pdb_status pdb_patchset_write_json(pdb_patchset ps, const char* path) {
  if (ps == nullptr || path == nullptr) return arg_error("null argument");
  return guarded([&] { write_patchset_json(ps->ps, path); });
}

void pdb_patchset_free(pdb_patchset ps) { delete ps; }

/* ---- databases ---- */

void pdb_compress_options_init(pdb_compress_options* opts) {
  if (opts == nullptr) return;
  opts->method = PDB_METHOD_GREEDY_L1;
  opts->eps = 1e-7;
  opts->db_size = 0;
  opts->seed = 42;
  opts->max_iters = 50;
  opts->best_match = 0;
  opts->threads = 1;
}

pdb_status pdb_database_build(pdb_matrix m, pdb_patchset ps, const pdb_compress_options* opts, pdb_database* out) {
  if (m == nullptr || ps == nullptr || opts == nullptr || out == nullptr) return arg_error("null argument");
  return guarded([&] {
    const std::vector<DenseMatrix> mats = extract_all(m->m, ps->ps, opts->threads);
    auto handle = std::make_unique<pdb_database_s>();
    switch (opts->method) {
      case PDB_METHOD_EXACT:
        handle->db = exact_database(mats, opts->threads);
        break;
      case PDB_METHOD_GREEDY_SPECTRAL:
        handle->db = greedy_tolerance(mats, opts->eps, Flavor::Spectral, opts->best_match != 0, opts->threads);
        break;
      case PDB_METHOD_GREEDY_L1:
        handle->db = greedy_tolerance(mats, opts->eps, Flavor::EntrywiseL1, opts->best_match != 0, opts->threads);
        break;
      case PDB_METHOD_KMEANS_ENTRYWISE:
        handle->db = partitioned_build(mats, opts->db_size, KmeansVariant::Entrywise, opts->seed, opts->max_iters,
                                       opts->threads);
        break;
      case PDB_METHOD_KMEANS_SPECTRAL:
        handle->db = partitioned_build(mats, opts->db_size, KmeansVariant::Spectral, opts->seed, opts->max_iters,
                                       opts->threads);
        break;
      case PDB_METHOD_KMEANS_VARMIN:
        handle->db = partitioned_build(mats, opts->db_size, KmeansVariant::VarianceMinimizing, opts->seed,
                                       opts->max_iters, opts->threads);
        break;
      case PDB_METHOD_BOOTSTRAP:
        handle->db = bootstrapped(mats, opts->eps, KmeansVariant::VarianceMinimizing, opts->max_iters, opts->threads);
        break;
      default:
        fail(Errc::invalid_argument, "unknown compression method");
    }
    *out = handle.release();
  });
}

int64_t pdb_database_size(pdb_database db) { return db == nullptr ? 0 : db->db.size(); }

int64_t pdb_database_n_patches(pdb_database db) { return db == nullptr ? 0 : db->db.n_patches(); }

pdb_status pdb_database_phi(pdb_database db, int64_t* phi) {
  if (db == nullptr || phi == nullptr) return arg_error("null argument");
  return guarded([&] { std::memcpy(phi, db->db.phi.data(), db->db.phi.size() * sizeof(int64_t)); });
}

pdb_status pdb_database_export(pdb_database db, const char* json_path, const char* bin_path) {
  if (db == nullptr || json_path == nullptr || bin_path == nullptr) return arg_error("null argument");
  return guarded([&] { export_database(db->db, json_path, bin_path); });
}

void pdb_database_free(pdb_database db) { delete db; }

/* ---- preconditioners ---- */

pdb_status pdb_precond_create(pdb_matrix m, pdb_patchset ps, pdb_database db, double omega, int threads,
                              pdb_precond* out) {
  if (ps == nullptr || out == nullptr) return arg_error("null argument");
  if (db == nullptr && m == nullptr) return arg_error("exact preconditioner needs the matrix");
  return guarded([&] {
    auto handle = std::make_unique<pdb_precond_s>();
    if (db == nullptr)
      handle->pc = std::make_unique<PatchPreconditioner>(
          PatchPreconditioner::exact(m->m, ps->ps, omega, threads));
    else
      handle->pc = std::make_unique<PatchPreconditioner>(
          PatchPreconditioner::compressed(ps->ps, db->db, omega, threads));
    *out = handle.release();
  });
}

pdb_status pdb_precond_create_combo(pdb_problem p, pdb_patchset ps, pdb_database db, double omega, int threads,
                                    pdb_precond* out) {
  if (p == nullptr || ps == nullptr || out == nullptr) return arg_error("null argument");
  return guarded([&] {
    PatchPreconditioner patch_pc =
        db == nullptr ? PatchPreconditioner::exact(p->p.matrix, ps->ps, omega, threads)
                      : PatchPreconditioner::compressed(ps->ps, db->db, omega, threads);
    const CoarseSpace cs = build_coarse_and_transfer(p->p.mesh, p->p.matrix);
    auto handle = std::make_unique<pdb_precond_s>();
    handle->pc = std::make_unique<ComboPreconditioner>(std::move(patch_pc), cs);
    *out = handle.release();
  });
}

pdb_status pdb_precond_apply(pdb_precond pc, const double* r, double* z) {
  if (pc == nullptr || r == nullptr || z == nullptr) return arg_error("null argument");
  return guarded([&] {
    const std::size_t n = static_cast<std::size_t>(pc->pc->size());
    pc->pc->apply({r, n}, {z, n});
  });
}

void pdb_precond_free(pdb_precond pc) { delete pc; }

/* ---- solver ---- */

void pdb_gmres_options_init(pdb_gmres_options* opts) {
  if (opts == nullptr) return;
  opts->restart = 20;
  opts->tol = 1e-8;
  opts->max_iters = 2000;
  opts->left_precond = 0;
  opts->threads = 1;
}

pdb_status pdb_gmres_solve(pdb_matrix m, const double* b, pdb_precond pc, const pdb_gmres_options* opts, double* x,
                           pdb_report* out_report) {
  if (m == nullptr || b == nullptr || opts == nullptr || x == nullptr) return arg_error("null argument");
  return guarded([&] {
    GmresOptions go{opts->restart, opts->tol, opts->max_iters, opts->left_precond != 0, opts->threads};
    GmresResult result = gmres(m->m, {b, static_cast<std::size_t>(m->m.n)}, pc == nullptr ? nullptr : pc->pc.get(), go);
    std::memcpy(x, result.x.data(), result.x.size() * sizeof(double));
    if (out_report != nullptr) {
      auto handle = std::make_unique<pdb_report_s>();
      handle->rep = std::move(result.report);
      *out_report = handle.release();
    }
  });
}

int64_t pdb_report_iterations(pdb_report rep) { return rep == nullptr ? 0 : rep->rep.iterations; }

int64_t pdb_report_restarts(pdb_report rep) { return rep == nullptr ? 0 : rep->rep.restarts; }

int pdb_report_converged(pdb_report rep) { return rep != nullptr && rep->rep.converged ? 1 : 0; }

double pdb_report_final_relative_residual(pdb_report rep) {
  return rep == nullptr ? 0.0 : rep->rep.final_relative_residual;
}

int64_t pdb_report_residual_history_size(pdb_report rep) {
  return rep == nullptr ? 0 : static_cast<int64_t>(rep->rep.residual_history.size());
}

pdb_status pdb_report_residual_history(pdb_report rep, double* out) {
  if (rep == nullptr || out == nullptr) return arg_error("null argument");
  return guarded([&] {
    std::memcpy(out, rep->rep.residual_history.data(), rep->rep.residual_history.size() * sizeof(double));
  });
}

void pdb_report_free(pdb_report rep) { delete rep; }

/* ---- experiment drivers ---- */

pdb_status pdb_run_experiment(const char* config_json, const char* out_csv) {
  if (config_json == nullptr || out_csv == nullptr) return arg_error("null argument");
  return guarded([&] {
    const ExperimentConfig cfg = parse_config(config_json);
    const std::vector<ExperimentRow> rows = run_experiment(cfg);
    write_experiment_csv(rows, cfg, out_csv);
  });
}

pdb_status pdb_run_analyze(const char* config_json, const char* curve_csv, const char* histogram_csv) {
  if (config_json == nullptr || curve_csv == nullptr || histogram_csv == nullptr) return arg_error("null argument");
  return guarded([&] {
    const ExperimentConfig cfg = parse_config(config_json);
    const AnalyzeResult result = run_analyze(cfg);
    write_analyze_csv(result, cfg, curve_csv, histogram_csv);
  });
}

pdb_status pdb_run_benchmark(const char* config_json, const char* out_csv) {
  if (config_json == nullptr || out_csv == nullptr) return arg_error("null argument");
  return guarded([&] {
    const ExperimentConfig cfg = parse_config(config_json);
    const std::vector<BenchmarkRow> rows = run_benchmark(cfg);
    write_benchmark_csv(rows, cfg, out_csv);
  });
}

pdb_status pdb_export_matrix(const char* config_json, const char* out_path) {
  if (config_json == nullptr || out_path == nullptr) return arg_error("null argument");
  return guarded([&] {
    const ExperimentConfig cfg = parse_config(config_json);
    export_matrix(cfg, out_path);
  });
}

} /* extern "C" */
