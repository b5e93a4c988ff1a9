#include "core/quadrature.hpp"

#include <cmath>
#include <numbers>

#include "core/errors.hpp"

namespace patchdb {

QuadratureRule gauss_legendre(int n) {
  require(n >= 1, Errc::invalid_argument, "quadrature order must be >= 1");
  QuadratureRule rule;
  rule.points.resize(static_cast<std::size_t>(n));
  rule.weights.resize(static_cast<std::size_t>(n));

  // Newton iteration on P_n over [-1,1], then map to [0,1]. Roots are
  // symmetric, so only the first half is computed.
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (static_cast<double>(n) + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / static_cast<double>(k);
        p0 = p1;
        p1 = p2;
      }
      dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.points[static_cast<std::size_t>(i)] = 0.5 * (1.0 - x);  // descending root -> ascending point
    rule.weights[static_cast<std::size_t>(i)] = 0.5 * w;
    rule.points[static_cast<std::size_t>(n - 1 - i)] = 0.5 * (1.0 + x);
    rule.weights[static_cast<std::size_t>(n - 1 - i)] = 0.5 * w;
  }
  return rule;
}

LagrangeBasis1D::LagrangeBasis1D(int deg) : degree(deg) {
  require(deg >= 1, Errc::invalid_degree, "polynomial degree must be >= 1");
  nodes.resize(static_cast<std::size_t>(deg) + 1);
  for (int a = 0; a <= deg; ++a) nodes[static_cast<std::size_t>(a)] = static_cast<double>(a) / static_cast<double>(deg);
}

double LagrangeBasis1D::value(int a, double x) const {
  double v = 1.0;
  const double xa = nodes[static_cast<std::size_t>(a)];
  for (int b = 0; b <= degree; ++b) {
    if (b == a) continue;
    const double xb = nodes[static_cast<std::size_t>(b)];
    v *= (x - xb) / (xa - xb);
  }
  return v;
}

double LagrangeBasis1D::derivative(int a, double x) const {
  double s = 0.0;
  const double xa = nodes[static_cast<std::size_t>(a)];
  for (int m = 0; m <= degree; ++m) {
    if (m == a) continue;
    double term = 1.0 / (xa - nodes[static_cast<std::size_t>(m)]);
    for (int b = 0; b <= degree; ++b) {
      if (b == a || b == m) continue;
      const double xb = nodes[static_cast<std::size_t>(b)];
      term *= (x - xb) / (xa - xb);
    }
    s += term;
  }
  return s;
}

}  // namespace patchdb
