#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

#include <doctest.h>

#include "oracles.hpp"
#include "svx/operator.hpp"

using namespace svx;

namespace {

GridPtr unit_box(int n, bool axis = false) {
  DomainGeometry g;
  g.rect = Rect{0.0, 1.0, 0.0, 1.0};
  g.axis = axis;
  return Grid::create(g, n, n);
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) d = std::max(d, std::abs(a[k] - b[k]));
  return d;
}

} // namespace

TEST_SUITE("operator") {

TEST_CASE("constant coefficient stencil") {
  const GridPtr g = unit_box(4);
  const SparseOperator A = assemble(*g, WeightProfile(ConstantDepth{1.0}));
  REQUIRE(A.n == 9);
  for (std::size_t i = 0; i < A.n; ++i) {
    CHECK(A.at(i, i) == 4.0);
    for (std::size_t j = 0; j < A.n; ++j) {
      if (i == j) continue;
      const int di = std::abs(g->i_of(g->interior_node(i)) - g->i_of(g->interior_node(j)));
      const int dj = std::abs(g->j_of(g->interior_node(i)) - g->j_of(g->interior_node(j)));
      CHECK(A.at(i, j) == (di + dj == 1 ? -1.0 : 0.0));
    }
  }
  CHECK(A.symmetric);
}

TEST_CASE("matches the dense oracle entrywise") {
  const GridPtr g = unit_box(9, true);
  const WeightProfile b = PowerWeight{1.0};
  const SparseOperator A = assemble(*g, b);
  const oracle::Matrix D = oracle::dense_operator(*g, b);
  double worst = 0.0;
  for (std::size_t i = 0; i < A.n; ++i)
    for (std::size_t j = 0; j < A.n; ++j) worst = std::max(worst, std::abs(A.at(i, j) - D[i][j]));
  CHECK(worst <= 1e-14);
}

TEST_CASE("quadratic form equals the Dirichlet energy") {
  const GridPtr g = unit_box(12, true);
  const WeightProfile b = PowerWeight{1.0};
  const SparseOperator A = assemble(*g, b);
  oracle::Sampler s(21);
  for (int k = 0; k < 50; ++k) {
    const Field u(g, s.vector(g->interior_count(), -1.0, 1.0));
    const double lhs = A.quadratic_form(u.values());
    CHECK(std::abs(lhs - dirichlet_energy(u, b)) <= 1e-13 * lhs);
  }
}

TEST_CASE("row sums vanish away from the boundary for b = r") {
  const GridPtr g = unit_box(10, true);
  const SparseOperator A = assemble(*g, WeightProfile(PowerWeight{1.0}));
  for (std::size_t k = 0; k < A.n; ++k) {
    const int i = g->i_of(g->interior_node(k));
    const int j = g->j_of(g->interior_node(k));
    if (i < 2 || j < 2 || i > 8 || j > 8) continue;
    double sum = 0.0;
    for (std::size_t e = A.row_ptr[k]; e < A.row_ptr[k + 1]; ++e) sum += A.val[e];
    CHECK(std::abs(sum) <= 1e-12 * A.at(k, k));
  }
}

TEST_CASE("cg_solve: consistency, dense oracle, zero rhs") {
  const GridPtr g = unit_box(7);
  const WeightProfile b = ConstantDepth{1.0};
  const SparseOperator A = assemble(*g, b);
  oracle::Sampler s(5);
  const std::vector<double> known = s.vector(A.n, -1.0, 1.0);
  const Field rhs(g, A.multiply(known));
  const auto [x, rep] = cg_solve(A, rhs, 1e-12, 1000);
  CHECK(rep.converged);
  CHECK(max_abs_diff(x.values(), known) <= 1e-10);

  const std::vector<double> f = s.vector(A.n, 0.0, 1.0);
  const auto [y, rep2] = cg_solve(A, Field(g, f), 1e-14, 1000);
  const std::vector<double> dense = oracle::dense_solve(oracle::dense_operator(*g, b), f);
  CHECK(max_abs_diff(y.values(), dense) <= 1e-10);

  const auto [z, rep3] = cg_solve(A, Field(g), 1e-12, 1000);
  CHECK(rep3.iterations == 0);
  CHECK(max_abs_diff(z.values(), std::vector<double>(A.n, 0.0)) == 0.0);
}

TEST_CASE("cg_solve: iteration cap reports non-convergence") {
  const GridPtr g = unit_box(32);
  const SparseOperator A = assemble(*g, WeightProfile(ConstantDepth{1.0}));
  const auto [x, rep] = cg_solve(A, Field(g, std::vector<double>(A.n, 1.0)), 1e-14, 3);
  CHECK_FALSE(rep.converged);
}

TEST_CASE("Cholesky factor agrees with the dense solve") {
  const GridPtr g = unit_box(10, true);
  const WeightProfile b = PowerWeight{1.0};
  const SparseOperator A = assemble(*g, b);
  const CholeskySolver chol(A);
  oracle::Sampler s(8);
  const std::vector<double> f = s.vector(A.n, -1.0, 1.0);
  std::vector<double> x(A.n);
  chol.solve(f, x);
  const std::vector<double> dense = oracle::dense_solve(oracle::dense_operator(*g, b), f);
  CHECK(max_abs_diff(x, dense) <= 1e-10);
}

TEST_CASE("harmonic extension: linear data is reproduced") {
  const GridPtr g = unit_box(16);
  NodalField data(g);
  for (std::size_t n = 0; n < data.size(); ++n) data[n] = 2.0 * g->node(n).x1 - 0.5;
  const NodalField q = solve_weighted_harmonic(g, ConstantDepth{1.0}, data);
  double worst = 0.0;
  for (std::size_t n = 0; n < q.size(); ++n) worst = std::max(worst, std::abs(q[n] - data[n]));
  CHECK(worst <= 1e-12);
}

TEST_CASE("harmonic extension: whole-space far field is discrete-harmonic") {
  DomainGeometry geo;
  geo.rect = Rect{0.0, 3.0, -3.0, 3.0};
  geo.axis = true;
  const GridPtr g = Grid::create(geo, 24, 48);
  const NodalField data = exterior_boundary_data(g, 1.0, 1.0, 1.0);
  const NodalField q = solve_weighted_harmonic(g, PowerWeight{1.0}, data);
  double worst = 0.0;
  for (std::size_t n = 0; n < q.size(); ++n) {
    const double r = g->node(n).x1;
    worst = std::max(worst, std::abs(q[n] - (0.5 * r * r + 1.0)));
  }
  CHECK(worst <= 1e-10);
}

TEST_CASE("harmonic extension around a disc stays below the far field") {
  DomainGeometry geo;
  geo.rect = Rect{0.0, 3.0, -3.0, 3.0};
  geo.axis = true;
  geo.truncated = true;
  geo.obstacle = DiscObstacle{{0.0, 0.0}, 1.0};
  const GridPtr g = Grid::create(geo, 32, 32);
  const WeightProfile b = PowerWeight{1.0};
  const NodalField data = exterior_boundary_data(g, 1.0, 1.0, 1.0);
  const NodalField q = solve_weighted_harmonic(g, b, data);
  const std::vector<double> x = oracle::dense_solve(
      oracle::dense_operator(*g, b), oracle::dense_boundary_rhs(*g, b, data.values()));
  for (std::size_t k = 0; k < x.size(); ++k) {
    const std::size_t n = g->interior_node(k);
    const double r = g->node(n).x1;
    CHECK(std::abs(q[n] - x[k]) <= 1e-8);
    CHECK(q[n] < 0.5 * r * r + 1.0);
  }
}

TEST_CASE("Matrix Market dump") {
  const GridPtr g = unit_box(3);
  const SparseOperator A = assemble(*g, WeightProfile(ConstantDepth{1.0}));
  std::ostringstream os;
  write_matrix_market(os, A);
  std::istringstream is(os.str());
  std::string header;
  std::getline(is, header);
  CHECK(header == "%%MatrixMarket matrix coordinate real general");
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t nnz = 0;
  is >> rows >> cols >> nnz;
  CHECK(rows == 4);
  CHECK(cols == 4);
  CHECK(nnz == A.nonzeros());
}

} // TEST_SUITE
