#pragma once

#include <iosfwd>
#include <string>

#include "core/sparse.hpp"

namespace patchdb {

/// Read a coordinate-format Matrix Market file (real, general or symmetric;
/// symmetric storage is expanded to the full pattern). 1-based indices.
/// Throws Errc::parse_error with the offending line number, or
/// Errc::non_square_matrix.
SparseMatrix read_matrix_market(const std::string& path);
SparseMatrix read_matrix_market(std::istream& in, const std::string& name);

/// Write in general coordinate format with 17 significant digits, so that a
/// read/write round trip reproduces the matrix bit for bit. All stored
/// entries are written, including explicit zeros.
void write_matrix_market(const SparseMatrix& a, const std::string& path);
void write_matrix_market(const SparseMatrix& a, std::ostream& out);

}  // namespace patchdb
