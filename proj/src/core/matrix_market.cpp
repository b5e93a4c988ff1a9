#include "core/matrix_market.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "core/errors.hpp"

namespace patchdb {

namespace {

[[noreturn]] void parse_fail(const std::string& name, long line, const std::string& what) {
  fail(Errc::parse_error, name + ": line " + std::to_string(line) + ": " + what);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

bool blank(const std::string& s) { return s.find_first_not_of(" \t\r\n") == std::string::npos; }

}  // namespace

SparseMatrix read_matrix_market(std::istream& in, const std::string& name) {
  std::string line;
  long lineno = 0;

  if (!std::getline(in, line)) parse_fail(name, 1, "empty file");
  ++lineno;

  std::istringstream hs(line);
  std::string banner, object, format, field, symmetry;
  hs >> banner >> object >> format >> field >> symmetry;
  if (banner != "%%MatrixMarket") parse_fail(name, lineno, "missing %%MatrixMarket banner");
  if (lower(object) != "matrix" || lower(format) != "coordinate")
    parse_fail(name, lineno, "only coordinate-format matrices are supported");
  if (lower(field) != "real") parse_fail(name, lineno, "only real matrices are supported");
  const std::string sym = lower(symmetry);
  if (sym != "general" && sym != "symmetric")
    parse_fail(name, lineno, "only general or symmetric matrices are supported");
  const bool expand = sym == "symmetric";

  // Skip comments, then read the size line.
  Index rows = 0, cols = 0;
  long long nnz = 0;
  for (;;) {
    if (!std::getline(in, line)) parse_fail(name, lineno + 1, "unexpected end of file before size line");
    ++lineno;
    if (!line.empty() && line[0] == '%') continue;
    if (blank(line)) continue;
    std::istringstream ss(line);
    if (!(ss >> rows >> cols >> nnz)) parse_fail(name, lineno, "malformed size line");
    break;
  }
  if (rows != cols)
    fail(Errc::non_square_matrix,
         name + ": matrix is " + std::to_string(rows) + "x" + std::to_string(cols) + ", expected square");

  std::vector<Triplet> entries;
  entries.reserve(static_cast<std::size_t>(expand ? 2 * nnz : nnz));
  for (long long k = 0; k < nnz; ++k) {
    if (!std::getline(in, line)) parse_fail(name, lineno + 1, "unexpected end of file in entry list");
    ++lineno;
    if (blank(line)) {
      --k;
      continue;
    }
    std::istringstream ss(line);
    Index i = 0, j = 0;
    double v = 0.0;
    if (!(ss >> i >> j >> v)) parse_fail(name, lineno, "malformed entry");
    if (i < 1 || i > rows || j < 1 || j > cols) parse_fail(name, lineno, "entry index out of range");
    if (!std::isfinite(v)) parse_fail(name, lineno, "non-finite entry value");
    entries.push_back({i - 1, j - 1, v});
    if (expand && i != j) entries.push_back({j - 1, i - 1, v});
  }
  return SparseMatrix::from_triplets(rows, std::move(entries));
}

SparseMatrix read_matrix_market(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::io_error, "cannot open '" + path + "' for reading");
  return read_matrix_market(in, path);
}

void write_matrix_market(const SparseMatrix& a, std::ostream& out) {
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << a.n << ' ' << a.n << ' ' << a.nnz() << '\n';
  char buf[64];
  for (Index i = 0; i < a.n; ++i) {
    const auto cols = a.row_cols(i);
    const auto vals = a.row_values(i);
    for (std::size_t p = 0; p < cols.size(); ++p) {
      std::snprintf(buf, sizeof(buf), "%.17g", vals[p]);
      out << (i + 1) << ' ' << (cols[p] + 1) << ' ' << buf << '\n';
    }
  }
}

void write_matrix_market(const SparseMatrix& a, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(Errc::io_error, "cannot open '" + path + "' for writing");
  write_matrix_market(a, out);
  if (!out) fail(Errc::io_error, "error while writing '" + path + "'");
}

}  // namespace patchdb
