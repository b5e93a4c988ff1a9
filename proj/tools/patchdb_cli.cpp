// Command-line front end for the patchdb shared library. Builds a JSON run
// configuration from a config file plus flag overrides and hands it to the
// library's experiment drivers.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "patchdb/patchdb.h"

namespace {

using nlohmann::json;

struct CommonFlags {
  std::string config_path;
  std::int64_t cells = 0;
  std::vector<int> degrees;
  int degree = 0;
  int dim = 0;
  std::vector<std::string> methods;
  std::vector<std::int64_t> db_sizes;
  double eps = 0.0;
  std::vector<double> eps_grid;
  std::uint64_t seed = 0;
  std::int64_t restart = 0;
  double tol = 0.0;
  std::int64_t max_iters = 0;
  double omega = 0.0;
  bool left_pc = false;
  bool best_match = false;
  int threads = 0;
  std::string out;
  std::string coeff_kind;
  std::string residuals_out;
  std::string patches_out;
  std::string db_out;
  std::string flavor;
  std::int64_t patch_size = 0;
  std::string matrix_path;
  std::int64_t applies = 0;
  int kmeans_max_iters = 0;
};

void add_solver_flags(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--seed", f.seed, "RNG seed for clustering initialization");
  cmd->add_option("--restart", f.restart, "GMRES restart length");
  cmd->add_option("--tol", f.tol, "GMRES relative residual tolerance");
  cmd->add_option("--max-iters", f.max_iters, "GMRES total iteration cap");
  cmd->add_option("--omega", f.omega, "patch preconditioner damping");
  cmd->add_flag("--left-pc", f.left_pc, "use left instead of right preconditioning");
  cmd->add_option("--threads", f.threads, "worker thread cap (results are thread-count independent)");
}

json load_config(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) {
    std::fprintf(stderr, "error: cannot open config file '%s'\n", path.c_str());
    std::exit(1);
  }
  std::stringstream ss;
  ss << in.rdbuf();
  json j = json::parse(ss.str(), nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    std::fprintf(stderr, "error: config file '%s' is not a JSON object\n", path.c_str());
    std::exit(1);
  }
  return j;
}

// Flags override config-file values only when the user actually passed them.
void apply_overrides(json& cfg, const CLI::App& cmd, const CommonFlags& f) {
  auto passed = [&](const std::string& name) {
    const CLI::Option* opt = cmd.get_option_no_throw(name);
    return opt != nullptr && opt->count() > 0;
  };
  if (passed("--cells")) cfg["cells"] = f.cells;
  if (passed("--degree")) {
    if (!f.degrees.empty()) cfg["degrees"] = f.degrees;
    if (f.degree != 0) cfg["degree"] = f.degree;
  }
  if (passed("--dim")) cfg["dim"] = f.dim;
  if (passed("--method")) cfg["methods"] = f.methods;
  if (passed("--db-size")) cfg["db_sizes"] = f.db_sizes;
  if (passed("--eps")) cfg["eps"] = f.eps;
  if (passed("--eps-grid")) cfg["eps_grid"] = f.eps_grid;
  if (passed("--seed")) cfg["seed"] = f.seed;
  if (passed("--restart")) cfg["restart"] = f.restart;
  if (passed("--tol")) cfg["tol"] = f.tol;
  if (passed("--max-iters")) cfg["max_iters"] = f.max_iters;
  if (passed("--omega")) cfg["omega"] = f.omega;
  if (passed("--left-pc")) cfg["left_precond"] = true;
  if (passed("--best-match")) cfg["best_match"] = true;
  if (passed("--threads")) cfg["threads"] = f.threads;
  if (passed("--coefficient")) cfg["coefficient"] = {{"kind", f.coeff_kind}};
  if (passed("--residuals")) cfg["residuals_out"] = f.residuals_out;
  if (passed("--patches-out")) cfg["patches_out"] = f.patches_out;
  if (passed("--db-out")) {
    cfg["db_out_json"] = f.db_out + ".json";
    cfg["db_out_bin"] = f.db_out + ".bin";
  }
  if (passed("--flavor")) cfg["flavor"] = f.flavor;
  if (passed("--patch-size")) cfg["patch_size"] = f.patch_size;
  if (passed("--matrix")) cfg["matrix"] = f.matrix_path;
  if (passed("--applies")) cfg["applies"] = f.applies;
  if (passed("--kmeans-max-iters")) cfg["kmeans_max_iters"] = f.kmeans_max_iters;
}

int report_status(pdb_status status) {
  if (status == PDB_OK) return 0;
  std::fprintf(stderr, "error: %s: %s\n", pdb_status_string(status), pdb_last_error());
  return 1;
}

void print_run_banner(const json& cfg) {
  const std::uint64_t seed = cfg.contains("seed") ? cfg["seed"].get<std::uint64_t>() : 42ull;
  std::printf("seed=%llu\n", static_cast<unsigned long long>(seed));
}

std::string histogram_path_for(const std::string& curve_path) {
  const std::size_t dot = curve_path.find_last_of('.');
  if (dot == std::string::npos) return curve_path + "_hist";
  return curve_path.substr(0, dot) + "_hist" + curve_path.substr(dot);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"patch-based relaxation preconditioners with a compressed factorization database"};
  app.require_subcommand(1);

  CommonFlags f;

  auto* exp1 = app.add_subcommand("experiment1", "smooth-coefficient Poisson study: iterations vs database size");
  auto* exp2 = app.add_subcommand("experiment2", "piecewise-constant-coefficient Poisson study");
  for (CLI::App* cmd : {exp1, exp2}) {
    cmd->add_option("--cells", f.cells, "mesh cells per axis (default 60)");
    cmd->add_option("--degree", f.degrees, "polynomial degrees to run (default 2 3 4 5)");
    cmd->add_option("--method", f.methods,
                    "full|greedy|greedy-l1|kmeans-entrywise|kmeans-spectral|kmeans-varmin|bootstrap");
    cmd->add_option("--db-size", f.db_sizes, "target database sizes");
    cmd->add_flag("--best-match", f.best_match, "greedy takes the closest entry below eps, not the first");
    cmd->add_option("--kmeans-max-iters", f.kmeans_max_iters, "clustering iteration cap (default 50)");
    cmd->add_option("--residuals", f.residuals_out, "also dump per-iteration residual histories to this CSV");
    cmd->add_option("--config", f.config_path, "JSON config file; flags override");
    cmd->add_option("--out", f.out, "output CSV path")->required();
    add_solver_flags(cmd, f);
  }

  auto* analyze = app.add_subcommand("analyze", "compressibility curve and phi histogram of an external matrix");
  analyze->add_option("--matrix", f.matrix_path, "Matrix Market file")->required();
  analyze->add_option("--patch-size", f.patch_size, "patch size to detect")->required();
  analyze->add_option("--eps-grid", f.eps_grid, "ascending tolerances (default log grid 1e-8..1e2)");
  analyze->add_option("--flavor", f.flavor, "l1|spectral (default l1)");
  analyze->add_option("--patches-out", f.patches_out, "write the detected patch set as JSON");
  analyze->add_option("--db-out", f.db_out, "export the largest-tolerance database to <prefix>.json/.bin");
  analyze->add_option("--threads", f.threads, "worker thread cap");
  analyze->add_option("--config", f.config_path, "JSON config file; flags override");
  analyze->add_option("--out", f.out, "curve CSV path (histogram goes to <out stem>_hist.csv)")->required();

  auto* bench = app.add_subcommand("benchmark", "setup/apply timing and storage, exact vs compressed");
  bench->add_option("--cells", f.cells, "mesh cells per axis (default 60)");
  bench->add_option("--degree", f.degree, "polynomial degree (default 2)");
  bench->add_option("--dim", f.dim, "2 or 3 (3D runs are expensive)");
  bench->add_option("--eps", f.eps, "greedy l1 tolerance (default 1e-7)");
  bench->add_option("--applies", f.applies, "preconditioner applications to time (default 20)");
  bench->add_option("--threads", f.threads, "worker thread cap");
  bench->add_option("--omega", f.omega, "patch preconditioner damping");
  bench->add_option("--config", f.config_path, "JSON config file; flags override");
  bench->add_option("--out", f.out, "output CSV path")->required();

  auto* exportm = app.add_subcommand("export-matrix", "assemble a problem and write it in Matrix Market format");
  exportm->add_option("--cells", f.cells, "mesh cells per axis");
  exportm->add_option("--degree", f.degree, "polynomial degree");
  exportm->add_option("--dim", f.dim, "2 or 3");
  exportm->add_option("--coefficient", f.coeff_kind, "smooth|constant|piecewise (default smooth)");
  exportm->add_option("--config", f.config_path, "JSON config file; flags override");
  exportm->add_option("--out", f.out, "output .mtx path")->required();

  CLI11_PARSE(app, argc, argv);

  CLI::App* cmd = app.get_subcommands().front();
  json cfg = load_config(f.config_path);
  apply_overrides(cfg, *cmd, f);

  if (cmd == exp1) cfg["experiment"] = 1;
  if (cmd == exp2) cfg["experiment"] = 2;

  const std::string cfg_text = cfg.dump();
  print_run_banner(cfg);

  if (cmd == exp1 || cmd == exp2)
    return report_status(pdb_run_experiment(cfg_text.c_str(), f.out.c_str()));
  if (cmd == analyze) {
    const std::string hist = histogram_path_for(f.out);
    return report_status(pdb_run_analyze(cfg_text.c_str(), f.out.c_str(), hist.c_str()));
  }
  if (cmd == bench) return report_status(pdb_run_benchmark(cfg_text.c_str(), f.out.c_str()));
  if (cmd == exportm) return report_status(pdb_export_matrix(cfg_text.c_str(), f.out.c_str()));
  return 1;
}
