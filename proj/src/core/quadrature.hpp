#pragma once

#include <vector>

namespace patchdb {

/// Gauss-Legendre rule on [0,1], exact for polynomials of degree 2n-1.
struct QuadratureRule {
  std::vector<double> points;
  std::vector<double> weights;
};

QuadratureRule gauss_legendre(int n);

/// Lagrange basis of the given degree on equispaced nodes 0, 1/p, ..., 1.
struct LagrangeBasis1D {
  explicit LagrangeBasis1D(int degree);

  int degree;
  std::vector<double> nodes;

  double value(int a, double x) const;
  double derivative(int a, double x) const;
};

}  // namespace patchdb
