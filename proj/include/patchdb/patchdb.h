/* patchdb -- patch-based relaxation preconditioners with a compressed
 * factorization database.
 *
 * C interface to the shared library. All objects are opaque handles owned
 * by the library; every function that can fail returns a pdb_status and
 * leaves a human-readable message retrievable with pdb_last_error() (the
 * message is thread-local). Handles are freed with their pdb_*_free
 * function; freeing NULL is a no-op.
 */
#ifndef PATCHDB_H
#define PATCHDB_H

#include <stdint.h>

#if defined(_WIN32)
#define PDB_API __declspec(dllexport)
#else
#define PDB_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum pdb_status {
  PDB_OK = 0,
  PDB_ERR_INVALID_ARGUMENT = 1,
  PDB_ERR_DIMENSION_MISMATCH = 2,
  PDB_ERR_SINGULAR_MATRIX = 3,
  PDB_ERR_INDEX_OUT_OF_RANGE = 4,
  PDB_ERR_DUPLICATE_INDEX = 5,
  PDB_ERR_PARSE = 6,
  PDB_ERR_NON_SQUARE_MATRIX = 7,
  PDB_ERR_NO_PATCHES_FOUND = 8,
  PDB_ERR_EMPTY_CLUSTER = 9,
  PDB_ERR_BUDGET_TOO_SMALL = 10,
  PDB_ERR_INVALID_DEGREE = 11,
  PDB_ERR_NON_POSITIVE_COEFFICIENT = 12,
  PDB_ERR_IO = 13,
  PDB_ERR_INTERNAL = 14
} pdb_status;

PDB_API const char* pdb_status_string(pdb_status status);

/* Message describing the most recent failure on the calling thread. */
PDB_API const char* pdb_last_error(void);

typedef struct pdb_matrix_s* pdb_matrix;
typedef struct pdb_problem_s* pdb_problem;
typedef struct pdb_patchset_s* pdb_patchset;
typedef struct pdb_database_s* pdb_database;
typedef struct pdb_precond_s* pdb_precond;
typedef struct pdb_report_s* pdb_report;

/* ---- sparse matrices ---------------------------------------------------- */

PDB_API pdb_status pdb_matrix_read_matrix_market(const char* path, pdb_matrix* out);
PDB_API pdb_status pdb_matrix_write_matrix_market(pdb_matrix m, const char* path);
PDB_API int64_t pdb_matrix_rows(pdb_matrix m);
PDB_API int64_t pdb_matrix_nnz(pdb_matrix m);
/* y = A*x; both arrays have pdb_matrix_rows entries. */
PDB_API pdb_status pdb_matrix_spmv(pdb_matrix m, const double* x, double* y);
PDB_API void pdb_matrix_free(pdb_matrix m);

/* ---- assembled model problems ------------------------------------------- */

/* config_json: {"dim":2, "cells":60, "degree":2,
 *               "coefficient":{"kind":"smooth"|"constant"|"piecewise", ...}} */
PDB_API pdb_status pdb_problem_assemble(const char* config_json, pdb_problem* out);
PDB_API int64_t pdb_problem_ndofs(pdb_problem p);
/* The caller owns the returned matrix handle. */
PDB_API pdb_status pdb_problem_matrix(pdb_problem p, pdb_matrix* out);
PDB_API pdb_status pdb_problem_rhs(pdb_problem p, double* out);
PDB_API pdb_status pdb_problem_exact_solution(pdb_problem p, double* out);
PDB_API pdb_status pdb_problem_l2_error(pdb_problem p, const double* discrete_solution, double* out);
PDB_API void pdb_problem_free(pdb_problem p);

/* ---- patch detection ------------------------------------------------------ */

PDB_API pdb_status pdb_patchset_detect(pdb_matrix m, int64_t patch_size, pdb_patchset* out);
PDB_API int64_t pdb_patchset_count(pdb_patchset ps);
PDB_API int64_t pdb_patchset_patch_size(pdb_patchset ps);
PDB_API pdb_status pdb_patchset_write_json(pdb_patchset ps, const char* path);
PDB_API void pdb_patchset_free(pdb_patchset ps);

/* ---- factorization database ---------------------------------------------- */

typedef enum pdb_method {
  PDB_METHOD_EXACT = 0,
  PDB_METHOD_GREEDY_SPECTRAL = 1,
  PDB_METHOD_GREEDY_L1 = 2,
  PDB_METHOD_KMEANS_ENTRYWISE = 3,
  PDB_METHOD_KMEANS_SPECTRAL = 4,
  PDB_METHOD_KMEANS_VARMIN = 5,
  PDB_METHOD_BOOTSTRAP = 6
} pdb_method;

typedef struct pdb_compress_options {
  pdb_method method;
  double eps;        /* greedy/bootstrap tolerance */
  int64_t db_size;   /* k-means cluster budget */
  uint64_t seed;
  int max_iters;     /* k-means iteration cap */
  int best_match;    /* greedy: take the closest entry below eps */
  int threads;
} pdb_compress_options;

PDB_API void pdb_compress_options_init(pdb_compress_options* opts);

PDB_API pdb_status pdb_database_build(pdb_matrix m, pdb_patchset ps, const pdb_compress_options* opts,
                                      pdb_database* out);
PDB_API int64_t pdb_database_size(pdb_database db);
PDB_API int64_t pdb_database_n_patches(pdb_database db);
/* phi: array of pdb_database_n_patches entries. */
PDB_API pdb_status pdb_database_phi(pdb_database db, int64_t* phi);
PDB_API pdb_status pdb_database_export(pdb_database db, const char* json_path, const char* bin_path);
PDB_API void pdb_database_free(pdb_database db);

/* ---- preconditioners ------------------------------------------------------ */

/* Patch preconditioner; pass db = NULL for the exact (one factorization per
 * patch) variant. */
PDB_API pdb_status pdb_precond_create(pdb_matrix m, pdb_patchset ps, pdb_database db, double omega, int threads,
                                      pdb_precond* out);
/* Additive combination with a coarse direct solve built from the problem's
 * mesh (2D). */
PDB_API pdb_status pdb_precond_create_combo(pdb_problem p, pdb_patchset ps, pdb_database db, double omega,
                                            int threads, pdb_precond* out);
PDB_API pdb_status pdb_precond_apply(pdb_precond pc, const double* r, double* z);
PDB_API void pdb_precond_free(pdb_precond pc);

/* ---- solver ---------------------------------------------------------------- */

typedef struct pdb_gmres_options {
  int64_t restart;
  double tol;
  int64_t max_iters;
  int left_precond;
  int threads;
} pdb_gmres_options;

PDB_API void pdb_gmres_options_init(pdb_gmres_options* opts);

/* Solves A x = b with restarted GMRES and the optional preconditioner
 * (pc may be NULL). x and b have pdb_matrix_rows entries; the report handle
 * is owned by the caller and may be NULL when not needed. */
PDB_API pdb_status pdb_gmres_solve(pdb_matrix m, const double* b, pdb_precond pc, const pdb_gmres_options* opts,
                                   double* x, pdb_report* out_report);

PDB_API int64_t pdb_report_iterations(pdb_report rep);
PDB_API int64_t pdb_report_restarts(pdb_report rep);
PDB_API int pdb_report_converged(pdb_report rep);
PDB_API double pdb_report_final_relative_residual(pdb_report rep);
PDB_API int64_t pdb_report_residual_history_size(pdb_report rep);
PDB_API pdb_status pdb_report_residual_history(pdb_report rep, double* out);
PDB_API void pdb_report_free(pdb_report rep);

/* ---- experiment drivers ----------------------------------------------------
 *
 * These run the full study pipelines from a JSON configuration and write
 * CSV reports; the CLI is a thin wrapper around them. See the README for
 * the configuration schema.
 */

PDB_API pdb_status pdb_run_experiment(const char* config_json, const char* out_csv);
PDB_API pdb_status pdb_run_analyze(const char* config_json, const char* curve_csv, const char* histogram_csv);
PDB_API pdb_status pdb_run_benchmark(const char* config_json, const char* out_csv);
PDB_API pdb_status pdb_export_matrix(const char* config_json, const char* out_path);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* PATCHDB_H */
