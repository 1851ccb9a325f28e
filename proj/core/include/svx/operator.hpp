#pragma once

#include <cstddef>
#include <iosfwd>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "svx/grid.hpp"

namespace svx {

/// Symmetric CSR matrix of the weighted Laplacian on the unknowns.
struct SparseOperator {
  std::size_t n = 0;
  std::vector<std::size_t> row_ptr;
  std::vector<std::size_t> col;
  std::vector<double> val;
  bool symmetric = false;  ///< set once A[i,j] == A[j,i] has been checked bitwise

  std::size_t nonzeros() const { return val.size(); }
  void multiply(std::span<const double> x, std::span<double> y) const;
  std::vector<double> multiply(std::span<const double> x) const;
  double quadratic_form(std::span<const double> x) const;
  std::vector<double> diagonal() const;
  double at(std::size_t i, std::size_t j) const;
};

/// 5-point stencil: A[i,j] = -w_e, A[i,i] = sum of incident edge weights,
/// including edges to Dirichlet nodes.
SparseOperator assemble(const Grid& grid, const EdgeWeights& w);
SparseOperator assemble(const Grid& grid, const WeightProfile& b);

struct LinearSolveReport {
  int iterations = 0;
  double residual = 0.0;  ///< ||A x - rhs|| / ||rhs|| recomputed after the solve
  bool converged = false;
};

struct CgOptions {
  double tol = 1e-10;
  int max_iterations = 20000;
  bool jacobi = true;
};

/// Preconditioned CG starting from the contents of x.
LinearSolveReport cg_solve(const SparseOperator& A, std::span<const double> rhs, std::span<double> x,
                           const CgOptions& opts = {});
std::pair<Field, LinearSolveReport> cg_solve(const SparseOperator& A, const Field& rhs, double tol,
                                             int max_iterations);

/// Sparse Cholesky factor of A (fill-reducing ordering); reusable across solves.
class CholeskySolver {
public:
  explicit CholeskySolver(const SparseOperator& A);
  ~CholeskySolver();
  CholeskySolver(const CholeskySolver&) = delete;
  CholeskySolver& operator=(const CholeskySolver&) = delete;

  void solve(std::span<const double> rhs, std::span<double> x) const;
  std::size_t size() const { return n_; }

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::size_t n_ = 0;
};

enum class LinearBackend { Cholesky, ConjugateGradient };

/// Interior values of the discrete weighted-harmonic extension of the data on
/// Dirichlet nodes; returned field carries the data on those nodes.
NodalField solve_weighted_harmonic(const GridPtr& grid, const WeightProfile& b,
                                   const NodalField& boundary_data,
                                   LinearBackend backend = LinearBackend::ConjugateGradient,
                                   double tol = 1e-13, LinearSolveReport* report = nullptr);

/// Far-field data q_inf = W x1^(alpha+1)/(alpha+1) + k on the outer boundary
/// and k on the obstacle.
NodalField exterior_boundary_data(const GridPtr& grid, double alpha, double W, double k);

/// Matrix Market coordinate format, general layout, 1-based indices.
void write_matrix_market(std::ostream& os, const SparseOperator& A);

} // namespace svx
