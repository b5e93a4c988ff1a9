#include "core/gmres.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>

#include "core/errors.hpp"

namespace patchdb {

namespace {

double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

GmresResult gmres(const SparseMatrix& a, std::span<const double> b, const Preconditioner* pc,
                  const GmresOptions& opt) {
  const Index n = a.n;
  require(static_cast<Index>(b.size()) == n, Errc::dimension_mismatch, "rhs length does not match the matrix");
  require(opt.restart >= 1, Errc::invalid_argument, "restart length must be >= 1");
  if (pc != nullptr)
    require(pc->size() == n, Errc::dimension_mismatch, "preconditioner does not match the matrix");

  GmresResult res;
  res.x.assign(static_cast<std::size_t>(n), 0.0);
  SolveReport& rep = res.report;

  const double bnorm = norm2(b);
  if (bnorm == 0.0) {
    rep.converged = true;
    rep.final_relative_residual = 0.0;
    return res;
  }

  // Operator of the iterated system: A M^{-1} (right), M^{-1} A (left), or A.
  std::vector<double> tmp(static_cast<std::size_t>(n));
  auto apply_op = [&](std::span<const double> v, std::span<double> out) {
    if (pc == nullptr) {
      spmv(a, v, out, opt.threads);
    } else if (opt.left_precond) {
      spmv(a, v, tmp, opt.threads);
      pc->apply(tmp, out);
    } else {
      pc->apply(v, tmp);
      spmv(a, tmp, out, opt.threads);
    }
  };

  auto true_relres = [&](std::span<const double> x) {
    std::vector<double> r(static_cast<std::size_t>(n));
    spmv(a, x, r, opt.threads);
    for (Index i = 0; i < n; ++i) r[static_cast<std::size_t>(i)] = b[static_cast<std::size_t>(i)] - r[static_cast<std::size_t>(i)];
    return norm2(r) / bnorm;
  };

  const std::size_t m = static_cast<std::size_t>(opt.restart);
  std::vector<std::vector<double>> v(m + 1, std::vector<double>(static_cast<std::size_t>(n)));
  std::vector<std::vector<double>> h(m + 1, std::vector<double>(m, 0.0));
  std::vector<double> cs(m, 0.0), sn(m, 0.0), g(m + 1, 0.0), y(m, 0.0);
  std::vector<double> r0(static_cast<std::size_t>(n));

  bool first_cycle = true;
  for (;;) {
    // Residual of the iterated system at the current x.
    if (first_cycle) {
      std::copy(b.begin(), b.end(), r0.begin());
    } else {
      spmv(a, res.x, r0, opt.threads);
      for (Index i = 0; i < n; ++i)
        r0[static_cast<std::size_t>(i)] = b[static_cast<std::size_t>(i)] - r0[static_cast<std::size_t>(i)];
    }
    if (pc != nullptr && opt.left_precond) {
      pc->apply(r0, tmp);
      std::swap(r0, tmp);
    }
    const double beta = norm2(r0);
    if (first_cycle) rep.residual_history.push_back(beta);
    const double refnorm = rep.residual_history.front();
    if (beta == 0.0) {
      rep.converged = true;
      break;
    }

    for (Index i = 0; i < n; ++i) v[0][static_cast<std::size_t>(i)] = r0[static_cast<std::size_t>(i)] / beta;
    std::fill(g.begin(), g.end(), 0.0);
    g[0] = beta;

    std::size_t steps = 0;
    bool breakdown = false;
    for (std::size_t j = 0; j < m; ++j) {
      apply_op(v[j], v[j + 1]);
      // Modified Gram-Schmidt.
      for (std::size_t i = 0; i <= j; ++i) {
        const double hij = dot(v[j + 1], v[i]);
        h[i][j] = hij;
        for (Index k = 0; k < n; ++k) v[j + 1][static_cast<std::size_t>(k)] -= hij * v[i][static_cast<std::size_t>(k)];
      }
      const double hj1 = norm2(v[j + 1]);
      h[j + 1][j] = hj1;
      if (hj1 > 0.0)
        for (Index k = 0; k < n; ++k) v[j + 1][static_cast<std::size_t>(k)] /= hj1;

      // Apply the accumulated rotations, then form the new one.
      for (std::size_t i = 0; i < j; ++i) {
        const double t1 = cs[i] * h[i][j] + sn[i] * h[i + 1][j];
        const double t2 = -sn[i] * h[i][j] + cs[i] * h[i + 1][j];
        h[i][j] = t1;
        h[i + 1][j] = t2;
      }
      const double denom = std::hypot(h[j][j], h[j + 1][j]);
      cs[j] = h[j][j] / denom;
      sn[j] = h[j + 1][j] / denom;
      h[j][j] = denom;
      h[j + 1][j] = 0.0;
      g[j + 1] = -sn[j] * g[j];
      g[j] = cs[j] * g[j];

      ++steps;
      ++rep.iterations;
      const double est = std::abs(g[j + 1]);
      rep.residual_history.push_back(std::max(est, DBL_MIN));
      if (hj1 == 0.0) {
        breakdown = true;  // happy breakdown: solution lies in the current space
        break;
      }
      if (est <= opt.tol * refnorm || rep.iterations >= opt.max_iters) break;
    }

    // y = argmin ||g - H y|| via the triangularized system.
    for (std::size_t i = steps; i-- > 0;) {
      double s = g[i];
      for (std::size_t k = i + 1; k < steps; ++k) s -= h[i][k] * y[k];
      y[i] = s / h[i][i];
    }
    std::fill(tmp.begin(), tmp.end(), 0.0);
    for (std::size_t i = 0; i < steps; ++i)
      for (Index k = 0; k < n; ++k) tmp[static_cast<std::size_t>(k)] += y[i] * v[i][static_cast<std::size_t>(k)];
    if (pc != nullptr && !opt.left_precond) {
      std::vector<double> corr(static_cast<std::size_t>(n));
      pc->apply(tmp, corr);
      for (Index k = 0; k < n; ++k) res.x[static_cast<std::size_t>(k)] += corr[static_cast<std::size_t>(k)];
    } else {
      for (Index k = 0; k < n; ++k) res.x[static_cast<std::size_t>(k)] += tmp[static_cast<std::size_t>(k)];
    }

    rep.final_relative_residual = true_relres(res.x);
    if (rep.final_relative_residual <= opt.tol || breakdown) {
      rep.converged = rep.final_relative_residual <= opt.tol || breakdown;
      break;
    }
    if (rep.iterations >= opt.max_iters) break;  // best iterate, unconverged
    ++rep.restarts;
    first_cycle = false;
  }

  rep.final_relative_residual = true_relres(res.x);
  return res;
}

}  // namespace patchdb
