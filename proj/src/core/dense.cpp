#include "core/dense.hpp"

#include <cmath>
#include <cstdio>
#include <numeric>
#include <string>

#include "core/errors.hpp"

namespace patchdb {

DenseMatrix::DenseMatrix(Index r, Index c) : rows(r), cols(c) {
  require(r >= 0 && c >= 0, Errc::invalid_argument, "negative matrix dimension");
  a.assign(static_cast<std::size_t>(r * c), 0.0);
}

DenseMatrix::DenseMatrix(Index r, Index c, std::vector<double> data) : rows(r), cols(c), a(std::move(data)) {
  require(r >= 0 && c >= 0, Errc::invalid_argument, "negative matrix dimension");
  require(a.size() == static_cast<std::size_t>(r * c), Errc::dimension_mismatch,
          "entry count does not match rows*cols");
  for (double v : a)
    require(std::isfinite(v), Errc::invalid_argument, "non-finite matrix entry");
}

DenseMatrix DenseMatrix::identity(Index n) {
  DenseMatrix m(n, n);
  for (Index i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

DenseFactor lu_factor(const DenseMatrix& m) {
  require(m.rows == m.cols, Errc::dimension_mismatch, "lu_factor requires a square matrix");
  require(m.rows >= 1, Errc::invalid_argument, "lu_factor requires dim >= 1");
  const Index n = m.rows;

  DenseFactor f;
  f.dim = n;
  f.lu = m;
  f.pivots.resize(static_cast<std::size_t>(n));
  std::iota(f.pivots.begin(), f.pivots.end(), Index{0});

  // Largest initial magnitude per column; reference scale for the pivot test.
  std::vector<double> colmax(static_cast<std::size_t>(n), 0.0);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      colmax[static_cast<std::size_t>(j)] = std::max(colmax[static_cast<std::size_t>(j)], std::abs(m(i, j)));

  auto& lu = f.lu;
  for (Index k = 0; k < n; ++k) {
    Index p = k;
    double best = std::abs(lu(k, k));
    for (Index i = k + 1; i < n; ++i) {
      const double v = std::abs(lu(i, k));
      if (v > best) {
        best = v;
        p = i;
      }
    }
    if (best == 0.0 || best < 1e-14 * colmax[static_cast<std::size_t>(k)])
      fail(Errc::singular_matrix,
           "singular matrix: pivot " + std::to_string(best) + " below threshold in column " + std::to_string(k));
    if (p != k) {
      for (Index j = 0; j < n; ++j) std::swap(lu(k, j), lu(p, j));
      std::swap(f.pivots[static_cast<std::size_t>(k)], f.pivots[static_cast<std::size_t>(p)]);
    }
    const double piv = lu(k, k);
    for (Index i = k + 1; i < n; ++i) {
      const double lik = lu(i, k) / piv;
      lu(i, k) = lik;
      if (lik == 0.0) continue;
      for (Index j = k + 1; j < n; ++j) lu(i, j) -= lik * lu(k, j);
    }
  }
  return f;
}

void lu_solve_into(const DenseFactor& f, std::span<const double> rhs, std::span<double> out) {
  const Index n = f.dim;
  require(static_cast<Index>(rhs.size()) == n, Errc::dimension_mismatch, "rhs length does not match factor dim");
  require(static_cast<Index>(out.size()) == n, Errc::dimension_mismatch, "out length does not match factor dim");
  const auto& lu = f.lu;
  // Apply the row permutation, then forward/backward substitution.
  for (Index i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = rhs[static_cast<std::size_t>(f.pivots[static_cast<std::size_t>(i)])];
  for (Index i = 1; i < n; ++i) {
    double s = out[static_cast<std::size_t>(i)];
    for (Index j = 0; j < i; ++j) s -= lu(i, j) * out[static_cast<std::size_t>(j)];
    out[static_cast<std::size_t>(i)] = s;
  }
  for (Index i = n - 1; i >= 0; --i) {
    double s = out[static_cast<std::size_t>(i)];
    for (Index j = i + 1; j < n; ++j) s -= lu(i, j) * out[static_cast<std::size_t>(j)];
    out[static_cast<std::size_t>(i)] = s / lu(i, i);
  }
}

std::vector<double> lu_solve(const DenseFactor& f, std::span<const double> rhs) {
  std::vector<double> x(static_cast<std::size_t>(f.dim));
  lu_solve_into(f, rhs, x);
  return x;
}

void lu_solve_transpose_into(const DenseFactor& f, std::span<const double> rhs, std::span<double> out) {
  const Index n = f.dim;
  require(static_cast<Index>(rhs.size()) == n, Errc::dimension_mismatch, "rhs length does not match factor dim");
  require(static_cast<Index>(out.size()) == n, Errc::dimension_mismatch, "out length does not match factor dim");
  const auto& lu = f.lu;
  // M^T = U^T L^T P, so solve U^T z = rhs, L^T w = z, then x = P^T w.
  std::vector<double> w(rhs.begin(), rhs.end());
  for (Index i = 0; i < n; ++i) {
    double s = w[static_cast<std::size_t>(i)];
    for (Index j = 0; j < i; ++j) s -= lu(j, i) * w[static_cast<std::size_t>(j)];
    w[static_cast<std::size_t>(i)] = s / lu(i, i);
  }
  for (Index i = n - 2; i >= 0; --i) {
    double s = w[static_cast<std::size_t>(i)];
    for (Index j = i + 1; j < n; ++j) s -= lu(j, i) * w[static_cast<std::size_t>(j)];
    w[static_cast<std::size_t>(i)] = s;
  }
  for (Index i = 0; i < n; ++i) out[static_cast<std::size_t>(f.pivots[static_cast<std::size_t>(i)])] = w[static_cast<std::size_t>(i)];
}

void mat_vec(const DenseMatrix& m, std::span<const double> x, std::span<double> out) {
  require(static_cast<Index>(x.size()) == m.cols, Errc::dimension_mismatch, "mat_vec length mismatch");
  require(static_cast<Index>(out.size()) == m.rows, Errc::dimension_mismatch, "mat_vec output mismatch");
  for (Index i = 0; i < m.rows; ++i) {
    double s = 0.0;
    const double* row = m.a.data() + i * m.cols;
    for (Index j = 0; j < m.cols; ++j) s += row[j] * x[static_cast<std::size_t>(j)];
    out[static_cast<std::size_t>(i)] = s;
  }
}

void mat_tvec(const DenseMatrix& m, std::span<const double> x, std::span<double> out) {
  require(static_cast<Index>(x.size()) == m.rows, Errc::dimension_mismatch, "mat_tvec length mismatch");
  require(static_cast<Index>(out.size()) == m.cols, Errc::dimension_mismatch, "mat_tvec output mismatch");
  for (Index j = 0; j < m.cols; ++j) out[static_cast<std::size_t>(j)] = 0.0;
  for (Index i = 0; i < m.rows; ++i) {
    const double xi = x[static_cast<std::size_t>(i)];
    const double* row = m.a.data() + i * m.cols;
    for (Index j = 0; j < m.cols; ++j) out[static_cast<std::size_t>(j)] += row[j] * xi;
  }
}

namespace {

double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace

double spectral_distance(const DenseMatrix& a, const DenseFactor& bf) {
  require(a.rows == a.cols, Errc::dimension_mismatch, "spectral_distance requires a square matrix");
  require(a.rows == bf.dim, Errc::dimension_mismatch, "spectral_distance dimension mismatch");
  const Index n = a.rows;
  const std::size_t un = static_cast<std::size_t>(n);

  // Deterministic start vector; the small ramp avoids a start exactly
  // orthogonal to the dominant singular vector.
  std::vector<double> v(un), t(un), w(un), s(un), u(un);
  for (Index i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = 1.0 + 1e-6 * static_cast<double>(i);
  const double vn = norm2(v);
  for (double& x : v) x /= vn;

  double lambda = 0.0;
  for (int it = 0; it < 200; ++it) {
    // w = C v = v - A (B^{-1} v)
    lu_solve_into(bf, v, t);
    mat_vec(a, t, w);
    for (Index i = 0; i < n; ++i) w[static_cast<std::size_t>(i)] = v[static_cast<std::size_t>(i)] - w[static_cast<std::size_t>(i)];
    // u = C^T w = w - B^{-T} (A^T w)
    mat_tvec(a, w, s);
    lu_solve_transpose_into(bf, s, t);
    for (Index i = 0; i < n; ++i) u[static_cast<std::size_t>(i)] = w[static_cast<std::size_t>(i)] - t[static_cast<std::size_t>(i)];

    double rq = 0.0;  // Rayleigh quotient of C^T C at the unit vector v
    for (Index i = 0; i < n; ++i) rq += v[static_cast<std::size_t>(i)] * u[static_cast<std::size_t>(i)];
    rq = std::max(rq, 0.0);
    if (rq <= 1e-28) return std::sqrt(rq);  // below double-precision resolution of the distance
    if (it > 0 && std::abs(rq - lambda) < 1e-8 * rq) return std::sqrt(rq);
    lambda = rq;

    const double un2 = norm2(u);
    if (un2 == 0.0) return 0.0;
    for (Index i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = u[static_cast<std::size_t>(i)] / un2;
  }
  return std::sqrt(lambda);
}

double entrywise_l1_distance(const DenseMatrix& a, const DenseMatrix& b) {
  require(a.same_shape(b), Errc::dimension_mismatch, "entrywise_l1_distance shape mismatch");
  double s = 0.0;
  for (std::size_t k = 0; k < a.a.size(); ++k) s += std::abs(a.a[k] - b.a[k]);
  return s;
}

DenseMatrix entrywise_mean(std::span<const DenseMatrix> ms) {
  require(!ms.empty(), Errc::empty_cluster, "entrywise_mean of an empty list");
  DenseMatrix out(ms[0].rows, ms[0].cols);
  for (const auto& m : ms) {
    require(m.same_shape(ms[0]), Errc::dimension_mismatch, "entrywise_mean shape mismatch");
    for (std::size_t k = 0; k < out.a.size(); ++k) out.a[k] += m.a[k];
  }
  const double inv = 1.0 / static_cast<double>(ms.size());
  for (double& x : out.a) x *= inv;
  return out;
}

DenseMatrix entrywise_mean_indexed(std::span<const DenseMatrix> all, std::span<const Index> members) {
  require(!members.empty(), Errc::empty_cluster, "entrywise_mean of an empty cluster");
  const DenseMatrix& first = all[static_cast<std::size_t>(members[0])];
  DenseMatrix out(first.rows, first.cols);
  for (Index k : members) {
    const auto& m = all[static_cast<std::size_t>(k)];
    require(m.same_shape(first), Errc::dimension_mismatch, "entrywise_mean shape mismatch");
    for (std::size_t q = 0; q < out.a.size(); ++q) out.a[q] += m.a[q];
  }
  const double inv = 1.0 / static_cast<double>(members.size());
  for (double& x : out.a) x *= inv;
  return out;
}

void dump_csv(const DenseMatrix& m, std::ostream& os) {
  char buf[64];
  for (Index i = 0; i < m.rows; ++i) {
    for (Index j = 0; j < m.cols; ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", m(i, j));
      os << buf;
      if (j + 1 < m.cols) os << ',';
    }
    os << '\n';
  }
}

}  // namespace patchdb
