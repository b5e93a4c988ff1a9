#include "core/banded.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "core/errors.hpp"

namespace patchdb {

BandedFactor band_factor(const SparseMatrix& a) {
  require(a.n >= 1, Errc::invalid_argument, "band_factor needs a nonempty matrix");
  BandedFactor f;
  f.n = a.n;
  for (Index i = 0; i < a.n; ++i)
    for (Index c : a.row_cols(i)) {
      f.kl = std::max(f.kl, i - c);
      f.ku = std::max(f.ku, c - i);
    }
  const Index n = a.n;
  const Index kv = f.kl + f.ku;  // upper width of the working storage
  const Index ldab = 2 * f.kl + f.ku + 1;
  f.ab.assign(static_cast<std::size_t>(ldab * n), 0.0);
  f.ipiv.resize(static_cast<std::size_t>(n));

  auto at = [&](Index band_row, Index jcol) -> double& {
    return f.ab[static_cast<std::size_t>(band_row * n + jcol)];
  };
  for (Index i = 0; i < n; ++i) {
    const auto cols = a.row_cols(i);
    const auto vals = a.row_values(i);
    for (std::size_t p = 0; p < cols.size(); ++p) at(kv + i - cols[p], cols[p]) = vals[p];
  }

  for (Index j = 0; j < n; ++j) {
    const Index km = std::min(f.kl, n - 1 - j);
    Index jp = 0;
    double best = std::abs(at(kv, j));
    for (Index t = 1; t <= km; ++t) {
      const double v = std::abs(at(kv + t, j));
      if (v > best) {
        best = v;
        jp = t;
      }
    }
    if (best == 0.0) fail(Errc::singular_matrix, "banded factorization hit a zero pivot in column " + std::to_string(j));
    f.ipiv[static_cast<std::size_t>(j)] = j + jp;
    const Index jend = std::min(j + kv, n - 1);
    if (jp != 0)
      for (Index jj = j; jj <= jend; ++jj) std::swap(at(kv + j - jj, jj), at(kv + j + jp - jj, jj));
    const double piv = at(kv, j);
    for (Index t = 1; t <= km; ++t) {
      const double m = at(kv + t, j) / piv;
      at(kv + t, j) = m;
      if (m == 0.0) continue;
      for (Index jj = j + 1; jj <= jend; ++jj) at(kv + t + j - jj, jj) -= m * at(kv + j - jj, jj);
    }
  }
  return f;
}

void BandedFactor::solve_into(std::span<const double> rhs, std::span<double> out) const {
  require(static_cast<Index>(rhs.size()) == n, Errc::dimension_mismatch, "banded solve length mismatch");
  require(static_cast<Index>(out.size()) == n, Errc::dimension_mismatch, "banded solve output mismatch");
  const Index kv = kl + ku;
  std::copy(rhs.begin(), rhs.end(), out.begin());
  auto at = [&](Index band_row, Index jcol) -> double {
    return ab[static_cast<std::size_t>(band_row * n + jcol)];
  };
  for (Index j = 0; j < n; ++j) {
    const Index p = ipiv[static_cast<std::size_t>(j)];
    if (p != j) std::swap(out[static_cast<std::size_t>(j)], out[static_cast<std::size_t>(p)]);
    const Index km = std::min(kl, n - 1 - j);
    const double xj = out[static_cast<std::size_t>(j)];
    if (xj == 0.0) continue;
    for (Index t = 1; t <= km; ++t) out[static_cast<std::size_t>(j + t)] -= at(kv + t, j) * xj;
  }
  for (Index i = n - 1; i >= 0; --i) {
    double s = out[static_cast<std::size_t>(i)];
    const Index jend = std::min(i + kv, n - 1);
    for (Index jj = i + 1; jj <= jend; ++jj) s -= at(kv + i - jj, jj) * out[static_cast<std::size_t>(jj)];
    out[static_cast<std::size_t>(i)] = s / at(kv, i);
  }
}

std::vector<double> BandedFactor::solve(std::span<const double> rhs) const {
  std::vector<double> x(static_cast<std::size_t>(n));
  solve_into(rhs, x);
  return x;
}

}  // namespace patchdb
