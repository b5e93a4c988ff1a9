#pragma once

#include <stdexcept>
#include <string>

namespace patchdb {

enum class Errc {
  invalid_argument,
  dimension_mismatch,
  singular_matrix,
  index_out_of_range,
  duplicate_index,
  parse_error,
  non_square_matrix,
  no_patches_found,
  empty_cluster,
  budget_too_small,
  invalid_degree,
  non_positive_coefficient,
  io_error,
};

/// Exception carrying a machine-readable code alongside the message, so the
/// C API can map failures onto status values without string matching.
class Exception : public std::runtime_error {
 public:
  Exception(Errc code, const std::string& msg) : std::runtime_error(msg), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& msg) { throw Exception(code, msg); }

inline void require(bool cond, Errc code, const char* msg) {
  if (!cond) fail(code, msg);
}

}  // namespace patchdb
