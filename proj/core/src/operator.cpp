#include "svx/operator.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include "svx/error.hpp"
#include "svx/vec.hpp"

namespace svx {

void SparseOperator::multiply(std::span<const double> x, std::span<double> y) const {
  for (std::size_t r = 0; r < n; ++r) {
    double s = 0.0;
    for (std::size_t k = row_ptr[r]; k < row_ptr[r + 1]; ++k) s += val[k] * x[col[k]];
    y[r] = s;
  }
}

std::vector<double> SparseOperator::multiply(std::span<const double> x) const {
  std::vector<double> y(n);
  multiply(x, y);
  return y;
}

double SparseOperator::quadratic_form(std::span<const double> x) const {
  return vec::pairwise(n, [&](std::size_t r) {
    double s = 0.0;
    for (std::size_t k = row_ptr[r]; k < row_ptr[r + 1]; ++k) s += val[k] * x[col[k]];
    return x[r] * s;
  });
}

std::vector<double> SparseOperator::diagonal() const {
  std::vector<double> d(n, 0.0);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t k = row_ptr[r]; k < row_ptr[r + 1]; ++k)
      if (col[k] == r) d[r] = val[k];
  return d;
}

double SparseOperator::at(std::size_t i, std::size_t j) const {
  for (std::size_t k = row_ptr[i]; k < row_ptr[i + 1]; ++k)
    if (col[k] == j) return val[k];
  return 0.0;
}

SparseOperator assemble(const Grid& grid, const EdgeWeights& w) {
  const int n2 = grid.n2();
  SparseOperator A;
  A.n = grid.interior_count();
  A.row_ptr.reserve(A.n + 1);
  A.col.reserve(5 * A.n);
  A.val.reserve(5 * A.n);
  A.row_ptr.push_back(0);
  auto w1 = [&](int i, int j) { return w.w1[static_cast<std::size_t>(i) * (n2 + 1) + j]; };
  auto w2 = [&](int i, int j) { return w.w2[static_cast<std::size_t>(i) * n2 + j]; };
  for (std::size_t r = 0; r < A.n; ++r) {
    const std::size_t node = grid.interior_node(r);
    const int i = grid.i_of(node);
    const int j = grid.j_of(node);
    // Neighbors in increasing lattice (hence unknown) order.
    const std::size_t nb[4] = {grid.node_index(i - 1, j), grid.node_index(i, j - 1),
                               grid.node_index(i, j + 1), grid.node_index(i + 1, j)};
    const double we[4] = {w1(i - 1, j), w2(i, j - 1), w2(i, j), w1(i, j)};
    const double diag = (we[0] + we[3]) + (we[1] + we[2]);
    for (int s = 0; s < 4; ++s) {
      if (s == 2) {
        A.col.push_back(r);
        A.val.push_back(diag);
      }
      const std::ptrdiff_t c = grid.interior_index(nb[s]);
      if (c >= 0) {
        A.col.push_back(static_cast<std::size_t>(c));
        A.val.push_back(-we[s]);
      }
    }
    A.row_ptr.push_back(A.col.size());
  }
  bool symmetric = true;
  for (std::size_t r = 0; r < A.n && symmetric; ++r)
    for (std::size_t k = A.row_ptr[r]; k < A.row_ptr[r + 1]; ++k)
      if (A.at(A.col[k], r) != A.val[k]) {
        symmetric = false;
        break;
      }
  A.symmetric = symmetric;
  return A;
}

SparseOperator assemble(const Grid& grid, const WeightProfile& b) {
  return assemble(grid, edge_weights(grid, b));
}

namespace {

double relative_residual(const SparseOperator& A, std::span<const double> rhs,
                         std::span<const double> x, double rhs_norm) {
  std::vector<double> r = A.multiply(x);
  for (std::size_t k = 0; k < r.size(); ++k) r[k] = rhs[k] - r[k];
  return vec::norm(r) / rhs_norm;
}

} // namespace

LinearSolveReport cg_solve(const SparseOperator& A, std::span<const double> rhs, std::span<double> x,
                           const CgOptions& opts) {
  if (!(opts.tol > 0.0)) throw std::invalid_argument("cg tolerance must be positive");
  LinearSolveReport rep;
  const std::size_t n = A.n;
  const double bnorm = vec::norm(rhs);
  if (bnorm == 0.0) {
    std::fill(x.begin(), x.end(), 0.0);
    rep.converged = true;
    return rep;
  }
  std::vector<double> inv_diag(n, 1.0);
  if (opts.jacobi) {
    const std::vector<double> d = A.diagonal();
    for (std::size_t k = 0; k < n; ++k) inv_diag[k] = 1.0 / d[k];
  }
  std::vector<double> r(n), z(n), p(n), Ap(n);
  // A few restarts from the true residual guard against recurrence drift.
  for (int restart = 0; restart < 4; ++restart) {
    A.multiply(x, Ap);
    for (std::size_t k = 0; k < n; ++k) r[k] = rhs[k] - Ap[k];
    if (vec::norm(r) <= opts.tol * bnorm) break;
    for (std::size_t k = 0; k < n; ++k) z[k] = inv_diag[k] * r[k];
    p = z;
    double rz = vec::dot(r, z);
    while (rep.iterations < opts.max_iterations) {
      A.multiply(p, Ap);
      const double pAp = vec::dot(p, Ap);
      if (!(pAp > 0.0)) break;
      const double alpha = rz / pAp;
      vec::axpy(alpha, p, x);
      vec::axpy(-alpha, Ap, r);
      ++rep.iterations;
      if (vec::norm(r) <= opts.tol * bnorm) break;
      for (std::size_t k = 0; k < n; ++k) z[k] = inv_diag[k] * r[k];
      const double rz_new = vec::dot(r, z);
      const double beta = rz_new / rz;
      rz = rz_new;
      for (std::size_t k = 0; k < n; ++k) p[k] = z[k] + beta * p[k];
    }
    if (rep.iterations >= opts.max_iterations) break;
  }
  rep.residual = relative_residual(A, rhs, x, bnorm);
  rep.converged = rep.residual <= opts.tol;
  return rep;
}

std::pair<Field, LinearSolveReport> cg_solve(const SparseOperator& A, const Field& rhs, double tol,
                                             int max_iterations) {
  Field x(rhs.grid_ptr());
  CgOptions opts;
  opts.tol = tol;
  opts.max_iterations = max_iterations;
  LinearSolveReport rep = cg_solve(A, rhs.values(), x.values(), opts);
  return {std::move(x), rep};
}

struct CholeskySolver::Impl {
  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>, Eigen::Lower, Eigen::AMDOrdering<int>> llt;
};

CholeskySolver::CholeskySolver(const SparseOperator& A) : impl_(std::make_unique<Impl>()), n_(A.n) {
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(A.nonzeros());
  for (std::size_t r = 0; r < A.n; ++r)
    for (std::size_t k = A.row_ptr[r]; k < A.row_ptr[r + 1]; ++k)
      if (A.col[k] <= r)
        triplets.emplace_back(static_cast<int>(r), static_cast<int>(A.col[k]), A.val[k]);
  Eigen::SparseMatrix<double> M(static_cast<int>(A.n), static_cast<int>(A.n));
  M.setFromTriplets(triplets.begin(), triplets.end());
  impl_->llt.compute(M);
  if (impl_->llt.info() != Eigen::Success)
    throw LinearSolveFailure("sparse Cholesky factorization failed (operator not positive definite)");
}

CholeskySolver::~CholeskySolver() = default;

void CholeskySolver::solve(std::span<const double> rhs, std::span<double> x) const {
  Eigen::Map<const Eigen::VectorXd> b(rhs.data(), static_cast<Eigen::Index>(n_));
  Eigen::Map<Eigen::VectorXd> out(x.data(), static_cast<Eigen::Index>(n_));
  out = impl_->llt.solve(b);
  if (impl_->llt.info() != Eigen::Success) throw LinearSolveFailure("sparse Cholesky solve failed");
}

NodalField solve_weighted_harmonic(const GridPtr& grid, const WeightProfile& b,
                                   const NodalField& boundary_data, LinearBackend backend,
                                   double tol, LinearSolveReport* report) {
  const Grid& g = *grid;
  if (boundary_data.size() != g.node_count())
    throw std::invalid_argument("boundary data must cover every lattice node");
  for (std::size_t k = 0; k < g.node_count(); ++k)
    if (!g.is_interior(k) && !std::isfinite(boundary_data[k]))
      throw std::invalid_argument("boundary data must be finite on Dirichlet nodes");
  const EdgeWeights w = edge_weights(g, b);
  const SparseOperator A = assemble(g, w);
  std::vector<double> rhs(A.n, 0.0);
  for_each_edge(g, w, [&](std::size_t a, std::size_t c, double we) {
    const std::ptrdiff_t ia = g.interior_index(a);
    const std::ptrdiff_t ic = g.interior_index(c);
    if (ia >= 0 && ic < 0) rhs[static_cast<std::size_t>(ia)] += we * boundary_data[c];
    if (ic >= 0 && ia < 0) rhs[static_cast<std::size_t>(ic)] += we * boundary_data[a];
  });
  std::vector<double> x(A.n, 0.0);
  LinearSolveReport rep;
  if (backend == LinearBackend::Cholesky) {
    CholeskySolver(A).solve(rhs, x);
    const double bnorm = vec::norm(rhs);
    rep.residual = bnorm > 0.0 ? relative_residual(A, rhs, x, bnorm) : 0.0;
    rep.converged = rep.residual <= std::max(tol, 1e-10);
  } else {
    CgOptions opts;
    opts.tol = tol;
    opts.max_iterations = 50 * static_cast<int>(g.n1() + g.n2()) + 1000;
    rep = cg_solve(A, rhs, x, opts);
  }
  if (report) *report = rep;
  if (!rep.converged)
    throw LinearSolveFailure("weighted-harmonic solve did not converge (residual " +
                             std::to_string(rep.residual) + ")");
  NodalField out = boundary_data;
  for (std::size_t k = 0; k < A.n; ++k) out[g.interior_node(k)] = x[k];
  return out;
}

NodalField exterior_boundary_data(const GridPtr& grid, double alpha, double W, double k) {
  NodalField out(grid);
  for (std::size_t n = 0; n < out.size(); ++n) {
    if (grid->blocked(n)) {
      out[n] = k;
      continue;
    }
    const double r = grid->node(n).x1;
    out[n] = W * std::pow(r, alpha + 1.0) / (alpha + 1.0) + k;
  }
  return out;
}

void write_matrix_market(std::ostream& os, const SparseOperator& A) {
  os << "%%MatrixMarket matrix coordinate real general\n";
  os << A.n << ' ' << A.n << ' ' << A.nonzeros() << '\n';
  char line[96];
  for (std::size_t r = 0; r < A.n; ++r)
    for (std::size_t k = A.row_ptr[r]; k < A.row_ptr[r + 1]; ++k) {
      std::snprintf(line, sizeof line, "%zu %zu %.17g\n", r + 1, A.col[k] + 1, A.val[k]);
      os << line;
    }
}

} // namespace svx
