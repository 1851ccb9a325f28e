#include <cmath>
#include <numbers>
#include <stdexcept>

#include <doctest.h>

#include "oracles.hpp"
#include "svx/grid.hpp"
#include "svx/model.hpp"

using namespace svx;

namespace {

GridPtr box(double x1, double x2, int n1, int n2, bool axis = false) {
  DomainGeometry g;
  g.rect = Rect{0.0, x1, 0.0, x2};
  g.axis = axis;
  return Grid::create(g, n1, n2);
}

} // namespace

TEST_SUITE("grid") {

TEST_CASE("lattice bookkeeping") {
  const GridPtr g = box(2.0, 3.0, 4, 6);
  CHECK(g->h1() == 0.5);
  CHECK(g->h2() == 0.5);
  CHECK(g->node_count() == 35);
  CHECK(g->interior_count() == 15);
  for (std::size_t k = 0; k < g->interior_count(); ++k)
    CHECK(g->interior_index(g->interior_node(k)) == static_cast<std::ptrdiff_t>(k));
  CHECK_FALSE(g->is_interior(g->node_index(0, 3)));
  CHECK(g->node(2, 3).x1 == 1.0);
  CHECK(g->node(2, 3).x2 == 1.5);
}

TEST_CASE("obstacle nodes are Dirichlet nodes") {
  DomainGeometry geo;
  geo.rect = Rect{0.0, 3.0, -3.0, 3.0};
  geo.axis = true;
  geo.obstacle = DiscObstacle{{0.0, 0.0}, 1.0};
  const GridPtr g = Grid::create(geo, 12, 24);
  for (std::size_t n = 0; n < g->node_count(); ++n) {
    const Point x = g->node(n);
    if (std::hypot(x.x1, x.x2) <= 1.0) {
      CHECK(g->blocked(n));
      CHECK_FALSE(g->is_interior(n));
    }
  }
}

TEST_CASE("integrate: area and first moment") {
  const GridPtr g = box(2.0, 3.0, 8, 12);
  CHECK(integrate(NodalField(g, std::vector<double>(g->node_count(), 1.0))) == doctest::Approx(6.0).epsilon(1e-15));

  for (int n : {8, 16, 32}) {
    const GridPtr u = box(1.0, 1.0, n, n, true);
    const NodalField one(u, std::vector<double>(u->node_count(), 1.0));
    const double v = integrate(one, PowerWeight{1.0});
    CHECK(std::abs(v - 0.5) <= 1.0 / (n * n));
  }
}

TEST_CASE("integrate: random field against direct summation") {
  const GridPtr g = box(1.0, 1.0, 8, 8);
  oracle::Sampler s(7);
  const Field f(g, s.vector(g->interior_count(), -1.0, 1.0));
  double direct = 0.0;
  for (std::size_t k = 0; k < f.size(); ++k) direct += f[k] * g->h1() * g->h2();
  CHECK(std::abs(integrate(f) - direct) <= 1e-14);
  const WeightProfile b = GaussianBump{1.0, 0.5, {0.3, 0.6}, 0.4};
  double weighted = 0.0;
  for (std::size_t k = 0; k < f.size(); ++k)
    weighted += f[k] * b(g->node(g->interior_node(k))) * g->h1() * g->h2();
  CHECK(std::abs(integrate(f, b) - weighted) <= 1e-14);
}

TEST_CASE("dirichlet_energy: zero, dense oracle, homogeneity") {
  const GridPtr g = box(1.0, 1.0, 10, 10);
  const WeightProfile one = ConstantDepth{1.0};
  CHECK(dirichlet_energy(Field(g), one) == 0.0);

  Field u(g);
  for (std::size_t k = 0; k < u.size(); ++k) u[k] = g->node(g->interior_node(k)).x1;
  const oracle::Matrix A = oracle::dense_operator(*g, one);
  const double ref = oracle::quadratic_form(A, u.values());
  CHECK(std::abs(dirichlet_energy(u, one) - ref) <= 1e-13 * ref);

  oracle::Sampler s(11);
  const WeightProfile b = PowerWeight{1.0};
  const GridPtr r = box(1.0, 1.0, 10, 10, true);
  const Field v(r, s.vector(r->interior_count(), -1.0, 1.0));
  Field w = v;
  for (double& x : w.values()) x *= 2.0;
  CHECK(dirichlet_energy(w, b) == 4.0 * dirichlet_energy(v, b));
}

TEST_CASE("sample_profile: nodal values") {
  const GridPtr g = box(1.0, 1.0, 4, 4, true);
  const NodalField rb = sample_profile(g, WeightProfile(PowerWeight{1.0}));
  CHECK(rb[g->node_index(2, 0)] == 0.5);

  DomainGeometry ring = default_ring_box(1.0);
  const GridPtr rg = Grid::create(ring, 12, 24);
  const ProblemSpec s = make_whole_space_ring(1.0, 4.0 * std::numbers::pi);
  const NodalField q = sample_profile(rg, s.profile);
  CHECK(q[rg->node_index(2, 12)] == doctest::Approx(2.0).epsilon(1e-15));

  const GridPtr lake = box(1.0, 1.0, 4, 4);
  const NodalField d = sample_profile(lake, WeightProfile(GaussianBump{1.0, 1.0, {0.5, 0.5}, 0.3}));
  CHECK(d[lake->node_index(2, 2)] == 2.0);
}

TEST_CASE("sample_profile: non-finite values are rejected") {
  const GridPtr g = box(1.0, 1.0, 4, 4, true);
  CHECK_THROWS(sample_profile(g, WeightProfile(PowerWeight{-1.0})));
}

TEST_CASE("expand and restrict are inverse on unknowns") {
  const GridPtr g = box(1.0, 2.0, 5, 7);
  oracle::Sampler s(3);
  const Field f(g, s.vector(g->interior_count(), 0.0, 1.0));
  const NodalField n = expand(f);
  CHECK(restrict_to_interior(n).values() == f.values());
  CHECK(n[g->node_index(0, 0)] == 0.0);
}

} // TEST_SUITE
