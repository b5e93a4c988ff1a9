#include "core/fem.hpp"

#include <cmath>
#include <numbers>

#include "core/errors.hpp"
#include "core/quadrature.hpp"

namespace patchdb {

namespace {

constexpr double kPi = std::numbers::pi;

double manufactured_u(std::array<double, 3> x, int dim) {
  double u = 1.0;
  for (int d = 0; d < dim; ++d) u *= std::sin(kPi * x[static_cast<std::size_t>(d)]);
  return u;
}

/// f = -div(rho grad u) for the manufactured u, evaluated pointwise.
double source_term(const Coefficient& coeff, std::array<double, 3> x, int dim) {
  const double u = manufactured_u(x, dim);
  switch (coeff.kind) {
    case CoeffKind::Constant:
      return coeff.constant_value * static_cast<double>(dim) * kPi * kPi * u;
    case CoeffKind::PiecewiseConstant:
      // Per-block constant: the distributional interface terms are dropped.
      return coeff.value(x[0], x[1]) * static_cast<double>(dim) * kPi * kPi * u;
    case CoeffKind::Smooth: {
      const double sx = std::sin(kPi * x[0]), sy = std::sin(kPi * x[1]);
      const double rho = sx * sx * sy * sy + 0.1;
      const double rho_x = kPi * std::sin(2.0 * kPi * x[0]) * sy * sy;
      const double rho_y = kPi * sx * sx * std::sin(2.0 * kPi * x[1]);
      const double u_x = kPi * std::cos(kPi * x[0]) * sy;
      const double u_y = kPi * sx * std::cos(kPi * x[1]);
      return -(rho_x * u_x + rho_y * u_y) + 2.0 * kPi * kPi * rho * u;
    }
  }
  return 0.0;
}

}  // namespace

Index StructuredMesh::n_dofs() const {
  Index n = 1;
  for (int d = 0; d < dim; ++d) n *= nodes_per_axis();
  return n;
}

Index StructuredMesh::n_cells() const {
  Index n = 1;
  for (int d = 0; d < dim; ++d) n *= cells_per_axis;
  return n;
}

std::array<Index, 3> StructuredMesh::dof_lattice(Index dof) const {
  const Index npa = nodes_per_axis();
  std::array<Index, 3> out{0, 0, 0};
  out[0] = dof % npa;
  out[1] = (dof / npa) % npa;
  if (dim == 3) out[2] = dof / (npa * npa);
  return out;
}

std::array<double, 3> StructuredMesh::dof_coords(Index dof) const {
  const auto lat = dof_lattice(dof);
  return {axis_coord(lat[0]), axis_coord(lat[1]), dim == 3 ? axis_coord(lat[2]) : 0.0};
}

std::vector<Index> StructuredMesh::cell_dofs(std::array<Index, 3> cell) const {
  const Index npa = nodes_per_axis();
  const int p = degree;
  std::vector<Index> out;
  out.reserve(static_cast<std::size_t>((p + 1) * (p + 1) * (dim == 3 ? p + 1 : 1)));
  const Index czmax = dim == 3 ? p : 0;
  for (Index c = 0; c <= czmax; ++c)
    for (Index b = 0; b <= p; ++b)
      for (Index a = 0; a <= p; ++a) {
        const Index ix = cell[0] * p + a;
        const Index iy = cell[1] * p + b;
        const Index iz = dim == 3 ? cell[2] * p + c : 0;
        out.push_back(ix + npa * (iy + npa * iz));
      }
  return out;
}

std::vector<std::vector<Index>> StructuredMesh::all_cell_dofs() const {
  std::vector<std::vector<Index>> out;
  out.reserve(static_cast<std::size_t>(n_cells()));
  const Index czmax = dim == 3 ? cells_per_axis - 1 : 0;
  for (Index cz = 0; cz <= czmax; ++cz)
    for (Index cy = 0; cy < cells_per_axis; ++cy)
      for (Index cx = 0; cx < cells_per_axis; ++cx) out.push_back(cell_dofs({cx, cy, cz}));
  return out;
}

void StructuredMesh::validate() const {
  require(dim == 2 || dim == 3, Errc::invalid_argument, "mesh dimension must be 2 or 3");
  require(cells_per_axis >= 1, Errc::invalid_argument, "mesh needs at least one cell per axis");
  require(degree >= 1, Errc::invalid_degree, "polynomial degree must be >= 1");
}

Coefficient Coefficient::constant(double v) {
  Coefficient c;
  c.kind = CoeffKind::Constant;
  c.constant_value = v;
  return c;
}

Coefficient Coefficient::smooth() {
  Coefficient c;
  c.kind = CoeffKind::Smooth;
  return c;
}

Coefficient Coefficient::checkerboard(Index bx, Index by, double lo, double hi) {
  Coefficient c;
  c.kind = CoeffKind::PiecewiseConstant;
  c.blocks_x = bx;
  c.blocks_y = by;
  c.block_values.resize(static_cast<std::size_t>(bx * by));
  for (Index j = 0; j < by; ++j)
    for (Index i = 0; i < bx; ++i) c.block_values[static_cast<std::size_t>(j * bx + i)] = ((i + j) % 2 == 0) ? lo : hi;
  return c;
}

double Coefficient::value(double x, double y, double z) const {
  (void)z;
  switch (kind) {
    case CoeffKind::Constant:
      return constant_value;
    case CoeffKind::Smooth: {
      const double sx = std::sin(kPi * x), sy = std::sin(kPi * y);
      return sx * sx * sy * sy + 0.1;
    }
    case CoeffKind::PiecewiseConstant: {
      Index bi = static_cast<Index>(std::floor(x * static_cast<double>(blocks_x)));
      Index bj = static_cast<Index>(std::floor(y * static_cast<double>(blocks_y)));
      bi = std::min(std::max<Index>(bi, 0), blocks_x - 1);
      bj = std::min(std::max<Index>(bj, 0), blocks_y - 1);
      return block_values[static_cast<std::size_t>(bj * blocks_x + bi)];
    }
  }
  return 1.0;
}

namespace {

void validate_coefficient(const StructuredMesh& mesh, const Coefficient& coeff) {
  if (mesh.dim == 3)
    require(coeff.kind == CoeffKind::Constant, Errc::invalid_argument,
            "only constant coefficients are supported in 3D");
  if (coeff.kind == CoeffKind::PiecewiseConstant)
    require(coeff.block_values.size() == static_cast<std::size_t>(coeff.blocks_x * coeff.blocks_y),
            Errc::invalid_argument, "piecewise coefficient needs blocks_x*blocks_y values");
}

struct BasisTables {
  // val[a][q], der[a][q] for the 1D basis at the 1D quadrature points.
  std::vector<std::vector<double>> val;
  std::vector<std::vector<double>> der;
};

BasisTables tabulate(const LagrangeBasis1D& basis, const QuadratureRule& rule) {
  const int p = basis.degree;
  const std::size_t nq = rule.points.size();
  BasisTables t;
  t.val.assign(static_cast<std::size_t>(p) + 1, std::vector<double>(nq));
  t.der.assign(static_cast<std::size_t>(p) + 1, std::vector<double>(nq));
  for (int a = 0; a <= p; ++a)
    for (std::size_t q = 0; q < nq; ++q) {
      t.val[static_cast<std::size_t>(a)][q] = basis.value(a, rule.points[q]);
      t.der[static_cast<std::size_t>(a)][q] = basis.derivative(a, rule.points[q]);
    }
  return t;
}

std::vector<bool> boundary_mask(const StructuredMesh& mesh) {
  const Index npa = mesh.nodes_per_axis();
  std::vector<bool> mask(static_cast<std::size_t>(mesh.n_dofs()), false);
  for (Index dof = 0; dof < mesh.n_dofs(); ++dof) {
    const auto lat = mesh.dof_lattice(dof);
    for (int d = 0; d < mesh.dim; ++d)
      if (lat[static_cast<std::size_t>(d)] == 0 || lat[static_cast<std::size_t>(d)] == npa - 1) {
        mask[static_cast<std::size_t>(dof)] = true;
        break;
      }
  }
  return mask;
}

}  // namespace

std::vector<double> manufactured_rhs(const StructuredMesh& mesh, const Coefficient& coeff) {
  mesh.validate();
  validate_coefficient(mesh, coeff);
  const int p = mesh.degree;
  const Index cells = mesh.cells_per_axis;
  const double h = 1.0 / static_cast<double>(cells);
  const LagrangeBasis1D basis(p);
  const QuadratureRule rule = gauss_legendre(p + 1);
  const BasisTables tab = tabulate(basis, rule);
  const std::size_t nq = rule.points.size();
  const Index nloc1 = p + 1;

  std::vector<double> f(static_cast<std::size_t>(mesh.n_dofs()), 0.0);
  const double jac = std::pow(h, mesh.dim);

  const Index czmax = mesh.dim == 3 ? cells - 1 : 0;
  const std::size_t nqz = mesh.dim == 3 ? nq : 1;
  for (Index cz = 0; cz <= czmax; ++cz)
    for (Index cy = 0; cy < cells; ++cy)
      for (Index cx = 0; cx < cells; ++cx) {
        const auto dofs = mesh.cell_dofs({cx, cy, cz});
        for (std::size_t qz = 0; qz < nqz; ++qz)
          for (std::size_t qy = 0; qy < nq; ++qy)
            for (std::size_t qx = 0; qx < nq; ++qx) {
              const std::array<double, 3> x = {
                  (static_cast<double>(cx) + rule.points[qx]) * h,
                  (static_cast<double>(cy) + rule.points[qy]) * h,
                  mesh.dim == 3 ? (static_cast<double>(cz) + rule.points[qz]) * h : 0.0};
              double w = rule.weights[qx] * rule.weights[qy] * jac;
              if (mesh.dim == 3) w *= rule.weights[qz];
              const double fv = source_term(coeff, x, mesh.dim);
              std::size_t loc = 0;
              const Index cmax = mesh.dim == 3 ? nloc1 : 1;
              for (Index c = 0; c < cmax; ++c)
                for (Index b = 0; b < nloc1; ++b)
                  for (Index a = 0; a < nloc1; ++a, ++loc) {
                    double phi = tab.val[static_cast<std::size_t>(a)][qx] * tab.val[static_cast<std::size_t>(b)][qy];
                    if (mesh.dim == 3) phi *= tab.val[static_cast<std::size_t>(c)][qz];
                    f[static_cast<std::size_t>(dofs[loc])] += w * fv * phi;
                  }
            }
      }
  return f;
}

std::vector<double> exact_solution(const StructuredMesh& mesh) {
  mesh.validate();
  std::vector<double> u(static_cast<std::size_t>(mesh.n_dofs()));
  for (Index dof = 0; dof < mesh.n_dofs(); ++dof)
    u[static_cast<std::size_t>(dof)] = manufactured_u(mesh.dof_coords(dof), mesh.dim);
  return u;
}

DiscreteProblem assemble(const StructuredMesh& mesh, const Coefficient& coeff) {
  mesh.validate();
  validate_coefficient(mesh, coeff);
  const int p = mesh.degree;
  const Index cells = mesh.cells_per_axis;
  const double h = 1.0 / static_cast<double>(cells);
  const double invh = 1.0 / h;
  const LagrangeBasis1D basis(p);
  const QuadratureRule rule = gauss_legendre(p + 1);
  const BasisTables tab = tabulate(basis, rule);
  const std::size_t nq = rule.points.size();
  const Index nloc1 = p + 1;
  const Index nloc = mesh.dim == 3 ? nloc1 * nloc1 * nloc1 : nloc1 * nloc1;
  const double jac = std::pow(h, mesh.dim);

  const std::vector<bool> is_boundary = boundary_mask(mesh);

  std::vector<Triplet> trips;
  trips.reserve(static_cast<std::size_t>(mesh.n_cells() * nloc * nloc));

  std::vector<double> klocal(static_cast<std::size_t>(nloc * nloc));
  std::vector<double> gx(static_cast<std::size_t>(nloc)), gy(static_cast<std::size_t>(nloc)),
      gz(static_cast<std::size_t>(nloc));

  const Index czmax = mesh.dim == 3 ? cells - 1 : 0;
  const std::size_t nqz = mesh.dim == 3 ? nq : 1;
  for (Index cz = 0; cz <= czmax; ++cz)
    for (Index cy = 0; cy < cells; ++cy)
      for (Index cx = 0; cx < cells; ++cx) {
        const auto dofs = mesh.cell_dofs({cx, cy, cz});
        std::fill(klocal.begin(), klocal.end(), 0.0);
        for (std::size_t qz = 0; qz < nqz; ++qz)
          for (std::size_t qy = 0; qy < nq; ++qy)
            for (std::size_t qx = 0; qx < nq; ++qx) {
              const std::array<double, 3> x = {
                  (static_cast<double>(cx) + rule.points[qx]) * h,
                  (static_cast<double>(cy) + rule.points[qy]) * h,
                  mesh.dim == 3 ? (static_cast<double>(cz) + rule.points[qz]) * h : 0.0};
              const double rho = coeff.value(x[0], x[1], x[2]);
              require(rho > 0.0, Errc::non_positive_coefficient, "coefficient must be positive");
              double w = rule.weights[qx] * rule.weights[qy] * jac * rho;
              if (mesh.dim == 3) w *= rule.weights[qz];

              std::size_t loc = 0;
              const Index cmax = mesh.dim == 3 ? nloc1 : 1;
              for (Index c = 0; c < cmax; ++c)
                for (Index b = 0; b < nloc1; ++b)
                  for (Index a = 0; a < nloc1; ++a, ++loc) {
                    const double va = tab.val[static_cast<std::size_t>(a)][qx];
                    const double vb = tab.val[static_cast<std::size_t>(b)][qy];
                    const double da = tab.der[static_cast<std::size_t>(a)][qx];
                    const double db = tab.der[static_cast<std::size_t>(b)][qy];
                    if (mesh.dim == 3) {
                      const double vc = tab.val[static_cast<std::size_t>(c)][qz];
                      const double dc = tab.der[static_cast<std::size_t>(c)][qz];
                      gx[loc] = da * vb * vc * invh;
                      gy[loc] = va * db * vc * invh;
                      gz[loc] = va * vb * dc * invh;
                    } else {
                      gx[loc] = da * vb * invh;
                      gy[loc] = va * db * invh;
                    }
                  }
              for (Index i = 0; i < nloc; ++i) {
                const double gxi = gx[static_cast<std::size_t>(i)];
                const double gyi = gy[static_cast<std::size_t>(i)];
                const double gzi = mesh.dim == 3 ? gz[static_cast<std::size_t>(i)] : 0.0;
                double* krow = klocal.data() + i * nloc;
                for (Index j = 0; j < nloc; ++j) {
                  double dot = gxi * gx[static_cast<std::size_t>(j)] + gyi * gy[static_cast<std::size_t>(j)];
                  if (mesh.dim == 3) dot += gzi * gz[static_cast<std::size_t>(j)];
                  krow[j] += w * dot;
                }
              }
            }
        for (Index i = 0; i < nloc; ++i) {
          const Index gi = dofs[static_cast<std::size_t>(i)];
          if (is_boundary[static_cast<std::size_t>(gi)]) continue;  // row replaced later
          for (Index j = 0; j < nloc; ++j)
            trips.push_back({gi, dofs[static_cast<std::size_t>(j)], klocal[static_cast<std::size_t>(i * nloc + j)]});
        }
      }

  DiscreteProblem prob;
  prob.mesh = mesh;
  prob.coeff = coeff;
  prob.rhs = manufactured_rhs(mesh, coeff);

  const std::vector<double> g = exact_solution(mesh);
  for (Index dof = 0; dof < mesh.n_dofs(); ++dof)
    if (is_boundary[static_cast<std::size_t>(dof)]) {
      trips.push_back({dof, dof, 1.0});
      prob.rhs[static_cast<std::size_t>(dof)] = g[static_cast<std::size_t>(dof)];
      prob.boundary_dofs.push_back(dof);
    }

  prob.matrix = SparseMatrix::from_triplets(mesh.n_dofs(), std::move(trips));
  return prob;
}

std::vector<double> TransferOp::apply(std::span<const double> coarse) const {
  require(static_cast<Index>(coarse.size()) == coarse_n, Errc::dimension_mismatch, "transfer apply length mismatch");
  std::vector<double> out(static_cast<std::size_t>(fine_n), 0.0);
  for (Index i = 0; i < fine_n; ++i) {
    double s = 0.0;
    for (Index p = row_ptr[static_cast<std::size_t>(i)]; p < row_ptr[static_cast<std::size_t>(i) + 1]; ++p)
      s += val[static_cast<std::size_t>(p)] * coarse[static_cast<std::size_t>(col[static_cast<std::size_t>(p)])];
    out[static_cast<std::size_t>(i)] = s;
  }
  return out;
}

std::vector<double> TransferOp::apply_transpose(std::span<const double> fine) const {
  require(static_cast<Index>(fine.size()) == fine_n, Errc::dimension_mismatch, "transfer apply_transpose mismatch");
  std::vector<double> out(static_cast<std::size_t>(coarse_n), 0.0);
  for (Index i = 0; i < fine_n; ++i) {
    const double ri = fine[static_cast<std::size_t>(i)];
    for (Index p = row_ptr[static_cast<std::size_t>(i)]; p < row_ptr[static_cast<std::size_t>(i) + 1]; ++p)
      out[static_cast<std::size_t>(col[static_cast<std::size_t>(p)])] += val[static_cast<std::size_t>(p)] * ri;
  }
  return out;
}

namespace {

/// Rectangular CSR product C = A * B with a dense accumulator per output
/// row. A scratch flag array marks touched columns so zero-valued partial
/// sums are not confused with untouched slots.
TransferOp rect_matmul(Index a_rows, const std::vector<Index>& a_rp, const std::vector<Index>& a_ci,
                       const std::vector<double>& a_v, const TransferOp& b) {
  TransferOp out;
  out.fine_n = a_rows;
  out.coarse_n = b.coarse_n;
  out.row_ptr.assign(static_cast<std::size_t>(a_rows) + 1, 0);
  std::vector<double> acc(static_cast<std::size_t>(b.coarse_n), 0.0);
  std::vector<char> seen(static_cast<std::size_t>(b.coarse_n), 0);
  std::vector<Index> touched;
  for (Index i = 0; i < a_rows; ++i) {
    touched.clear();
    for (Index p = a_rp[static_cast<std::size_t>(i)]; p < a_rp[static_cast<std::size_t>(i) + 1]; ++p) {
      const Index k = a_ci[static_cast<std::size_t>(p)];
      const double av = a_v[static_cast<std::size_t>(p)];
      for (Index q = b.row_ptr[static_cast<std::size_t>(k)]; q < b.row_ptr[static_cast<std::size_t>(k) + 1]; ++q) {
        const Index j = b.col[static_cast<std::size_t>(q)];
        if (!seen[static_cast<std::size_t>(j)]) {
          seen[static_cast<std::size_t>(j)] = 1;
          touched.push_back(j);
        }
        acc[static_cast<std::size_t>(j)] += av * b.val[static_cast<std::size_t>(q)];
      }
    }
    std::sort(touched.begin(), touched.end());
    for (Index j : touched) {
      out.col.push_back(j);
      out.val.push_back(acc[static_cast<std::size_t>(j)]);
      acc[static_cast<std::size_t>(j)] = 0.0;
      seen[static_cast<std::size_t>(j)] = 0;
    }
    out.row_ptr[static_cast<std::size_t>(i) + 1] = static_cast<Index>(out.col.size());
  }
  return out;
}

TransferOp transpose_rect(const TransferOp& b) {
  TransferOp t;
  t.fine_n = b.coarse_n;
  t.coarse_n = b.fine_n;
  t.row_ptr.assign(static_cast<std::size_t>(b.coarse_n) + 1, 0);
  for (Index c : b.col) ++t.row_ptr[static_cast<std::size_t>(c) + 1];
  for (std::size_t i = 1; i < t.row_ptr.size(); ++i) t.row_ptr[i] += t.row_ptr[i - 1];
  t.col.resize(b.col.size());
  t.val.resize(b.val.size());
  std::vector<Index> next(t.row_ptr.begin(), t.row_ptr.end() - 1);
  for (Index i = 0; i < b.fine_n; ++i)
    for (Index p = b.row_ptr[static_cast<std::size_t>(i)]; p < b.row_ptr[static_cast<std::size_t>(i) + 1]; ++p) {
      const Index c = b.col[static_cast<std::size_t>(p)];
      const Index slot = next[static_cast<std::size_t>(c)]++;
      t.col[static_cast<std::size_t>(slot)] = i;
      t.val[static_cast<std::size_t>(slot)] = b.val[static_cast<std::size_t>(p)];
    }
  return t;
}

}  // namespace

CoarseSpace build_coarse_and_transfer(const StructuredMesh& mesh, const SparseMatrix& a) {
  mesh.validate();
  require(mesh.dim == 2, Errc::invalid_argument, "coarse transfer is implemented for 2D meshes");
  require(a.n == mesh.n_dofs(), Errc::dimension_mismatch, "matrix size does not match mesh");

  const Index cells = mesh.cells_per_axis;
  const int p = mesh.degree;
  const Index nca = cells + 1;  // coarse vertices per axis

  CoarseSpace cs;
  auto& p0 = cs.p0;
  p0.fine_n = mesh.n_dofs();
  p0.coarse_n = nca * nca;
  p0.row_ptr.assign(static_cast<std::size_t>(p0.fine_n) + 1, 0);

  for (Index dof = 0; dof < p0.fine_n; ++dof) {
    const auto lat = mesh.dof_lattice(dof);
    // Containing coarse cell and local coordinates within it.
    Index cx = std::min(lat[0] / p, cells - 1);
    Index cy = std::min(lat[1] / p, cells - 1);
    const double xi = static_cast<double>(lat[0] - cx * p) / static_cast<double>(p);
    const double eta = static_cast<double>(lat[1] - cy * p) / static_cast<double>(p);
    const Index v00 = cx + nca * cy;
    const std::array<std::pair<Index, double>, 4> entries = {{
        {v00, (1.0 - xi) * (1.0 - eta)},
        {v00 + 1, xi * (1.0 - eta)},
        {v00 + nca, (1.0 - xi) * eta},
        {v00 + nca + 1, xi * eta},
    }};
    for (const auto& [c, w] : entries) {
      if (w == 0.0) continue;  // exact: xi/eta are ratios of integers
      p0.col.push_back(c);
      p0.val.push_back(w);
    }
    p0.row_ptr[static_cast<std::size_t>(dof) + 1] = static_cast<Index>(p0.col.size());
  }

  const TransferOp ap0 = rect_matmul(a.n, a.row_ptr, a.col_idx, a.values, p0);
  const TransferOp r0 = transpose_rect(p0);
  TransferOp coarse_rect = rect_matmul(r0.fine_n, r0.row_ptr, r0.col, r0.val, ap0);

  cs.coarse_matrix.n = coarse_rect.fine_n;
  cs.coarse_matrix.row_ptr = std::move(coarse_rect.row_ptr);
  cs.coarse_matrix.col_idx = std::move(coarse_rect.col);
  cs.coarse_matrix.values = std::move(coarse_rect.val);
  return cs;
}

double l2_error(const StructuredMesh& mesh, std::span<const double> discrete_solution) {
  mesh.validate();
  require(static_cast<Index>(discrete_solution.size()) == mesh.n_dofs(), Errc::dimension_mismatch,
          "solution length does not match mesh");
  const int p = mesh.degree;
  const Index cells = mesh.cells_per_axis;
  const double h = 1.0 / static_cast<double>(cells);
  const LagrangeBasis1D basis(p);
  const QuadratureRule rule = gauss_legendre(p + 3);
  const BasisTables tab = tabulate(basis, rule);
  const std::size_t nq = rule.points.size();
  const Index nloc1 = p + 1;
  const double jac = std::pow(h, mesh.dim);

  double err2 = 0.0;
  const Index czmax = mesh.dim == 3 ? cells - 1 : 0;
  const std::size_t nqz = mesh.dim == 3 ? nq : 1;
  for (Index cz = 0; cz <= czmax; ++cz)
    for (Index cy = 0; cy < cells; ++cy)
      for (Index cx = 0; cx < cells; ++cx) {
        const auto dofs = mesh.cell_dofs({cx, cy, cz});
        for (std::size_t qz = 0; qz < nqz; ++qz)
          for (std::size_t qy = 0; qy < nq; ++qy)
            for (std::size_t qx = 0; qx < nq; ++qx) {
              const std::array<double, 3> x = {
                  (static_cast<double>(cx) + rule.points[qx]) * h,
                  (static_cast<double>(cy) + rule.points[qy]) * h,
                  mesh.dim == 3 ? (static_cast<double>(cz) + rule.points[qz]) * h : 0.0};
              double w = rule.weights[qx] * rule.weights[qy] * jac;
              if (mesh.dim == 3) w *= rule.weights[qz];
              double uh = 0.0;
              std::size_t loc = 0;
              const Index cmax = mesh.dim == 3 ? nloc1 : 1;
              for (Index c = 0; c < cmax; ++c)
                for (Index b = 0; b < nloc1; ++b)
                  for (Index a = 0; a < nloc1; ++a, ++loc) {
                    double phi = tab.val[static_cast<std::size_t>(a)][qx] * tab.val[static_cast<std::size_t>(b)][qy];
                    if (mesh.dim == 3) phi *= tab.val[static_cast<std::size_t>(c)][qz];
                    uh += discrete_solution[static_cast<std::size_t>(dofs[loc])] * phi;
                  }
              const double diff = uh - manufactured_u(x, mesh.dim);
              err2 += w * diff * diff;
            }
      }
  return std::sqrt(err2);
}

}  // namespace patchdb
