#pragma once

#include <array>
#include <span>
#include <vector>

#include "core/sparse.hpp"
#include "core/types.hpp"

namespace patchdb {

/// Uniform quadrilateral/hexahedral mesh of [0,1]^dim with Q_p Lagrange
/// elements on equispaced nodes. Global DoF ids are lexicographic with x
/// fastest, so the DoF lattice has cells_per_axis*degree + 1 nodes per axis.
struct StructuredMesh {
  int dim = 2;
  Index cells_per_axis = 1;
  int degree = 1;

  Index nodes_per_axis() const { return cells_per_axis * degree + 1; }
  Index n_dofs() const;
  Index n_cells() const;

  /// Physical coordinate of a lattice index along one axis.
  double axis_coord(Index k) const { return static_cast<double>(k) / static_cast<double>(cells_per_axis * degree); }

  std::array<Index, 3> dof_lattice(Index dof) const;
  std::array<double, 3> dof_coords(Index dof) const;

  /// Global DoF ids of one cell in ascending order.
  std::vector<Index> cell_dofs(std::array<Index, 3> cell) const;
  std::vector<std::vector<Index>> all_cell_dofs() const;

  void validate() const;
};

enum class CoeffKind { Constant, Smooth, PiecewiseConstant };

/// Diffusion coefficient for -div(rho grad u) = f.
///
/// Smooth is the fixed form sin^2(pi x) sin^2(pi y) + 0.1; PiecewiseConstant
/// is a rectangular block layout (defaults to a 4x4 checkerboard of 1 and
/// 100 with block edges on cell boundaries for meshes divisible by 4).
struct Coefficient {
  CoeffKind kind = CoeffKind::Constant;
  double constant_value = 1.0;
  Index blocks_x = 4;
  Index blocks_y = 4;
  std::vector<double> block_values;  // row-major over blocks, y-major

  static Coefficient constant(double v = 1.0);
  static Coefficient smooth();
  static Coefficient checkerboard(Index bx, Index by, double lo, double hi);

  double value(double x, double y, double z = 0.0) const;
};

struct DiscreteProblem {
  SparseMatrix matrix;
  std::vector<double> rhs;
  std::vector<Index> boundary_dofs;
  StructuredMesh mesh;
  Coefficient coeff;
};

/// Stiffness matrix for -div(rho grad u) with tensor Gauss-Legendre
/// quadrature of degree+1 points per axis, manufactured right-hand side for
/// u = prod_d sin(pi x_d), and Dirichlet rows replaced by identity rows
/// without column elimination.
DiscreteProblem assemble(const StructuredMesh& mesh, const Coefficient& coeff);

/// Raw load vector (before boundary row replacement).
std::vector<double> manufactured_rhs(const StructuredMesh& mesh, const Coefficient& coeff);

/// Exact manufactured solution evaluated at the DoF coordinates.
std::vector<double> exact_solution(const StructuredMesh& mesh);

/// Rectangular CSR operator interpolating coarse vertex values to fine DoFs.
struct TransferOp {
  Index fine_n = 0;
  Index coarse_n = 0;
  std::vector<Index> row_ptr;
  std::vector<Index> col;
  std::vector<double> val;

  std::vector<double> apply(std::span<const double> coarse) const;
  std::vector<double> apply_transpose(std::span<const double> fine) const;
};

struct CoarseSpace {
  TransferOp p0;            // bilinear interpolation, fine DoFs x coarse vertices
  SparseMatrix coarse_matrix;  // R0 A P0 with R0 = P0^T
};

/// Coarse vertex space on the cell corners of the mesh; at degree 1 the
/// transfer is the identity and the coarse matrix equals A. 2D only.
CoarseSpace build_coarse_and_transfer(const StructuredMesh& mesh, const SparseMatrix& a);

/// Quadrature-evaluated L2 distance between the discrete solution and the
/// manufactured exact solution.
double l2_error(const StructuredMesh& mesh, std::span<const double> discrete_solution);

}  // namespace patchdb
