#include "svx/grid.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>
#include <string>

#include "svx/error.hpp"
#include "svx/vec.hpp"

namespace svx {

Grid::Grid(DomainGeometry geometry, int n1, int n2)
    : geometry_(std::move(geometry)), n1_(n1), n2_(n2) {
  if (n1 < 2 || n2 < 2) throw std::invalid_argument("grid needs at least 2 cells per axis");
  geometry_.validate();
  h1_ = geometry_.rect.width() / n1;
  h2_ = geometry_.rect.height() / n2;
  const std::size_t count = node_count();
  index_map_.assign(count, -1);
  blocked_.assign(count, 0);
  for (int i = 0; i <= n1; ++i)
    for (int j = 0; j <= n2; ++j) {
      const std::size_t k = node_index(i, j);
      if (geometry_.blocked(node(i, j))) blocked_[k] = 1;
      const bool edge = i == 0 || i == n1 || j == 0 || j == n2;
      if (!edge && !blocked_[k]) {
        index_map_[k] = static_cast<std::ptrdiff_t>(interior_nodes_.size());
        interior_nodes_.push_back(k);
      }
    }
  if (interior_nodes_.empty()) throw std::invalid_argument("grid has no interior nodes");
}

std::shared_ptr<const Grid> Grid::create(DomainGeometry geometry, int n1, int n2) {
  return std::make_shared<const Grid>(std::move(geometry), n1, n2);
}

Point Grid::node(int i, int j) const {
  return {geometry_.rect.x1_min + i * h1_, geometry_.rect.x2_min + j * h2_};
}

double Grid::trapezoid_weight(std::size_t node) const {
  if (blocked_[node]) return 0.0;
  const int i = i_of(node);
  const int j = j_of(node);
  const double wi = (i == 0 || i == n1_) ? 0.5 : 1.0;
  const double wj = (j == 0 || j == n2_) ? 0.5 : 1.0;
  return wi * wj * cell_area();
}

Field::Field(GridPtr grid) : grid_(std::move(grid)), values_(grid_->interior_count(), 0.0) {}

Field::Field(GridPtr grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (values_.size() != grid_->interior_count())
    throw std::invalid_argument("field size does not match the interior node count");
}

NodalField::NodalField(GridPtr grid) : grid_(std::move(grid)), values_(grid_->node_count(), 0.0) {}

NodalField::NodalField(GridPtr grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (values_.size() != grid_->node_count())
    throw std::invalid_argument("nodal field size does not match the node count");
}

NodalField expand(const Field& f) {
  NodalField out(f.grid_ptr());
  const Grid& g = f.grid();
  for (std::size_t k = 0; k < f.size(); ++k) out[g.interior_node(k)] = f[k];
  return out;
}

Field restrict_to_interior(const NodalField& f) {
  Field out(f.grid_ptr());
  const Grid& g = f.grid();
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = f[g.interior_node(k)];
  return out;
}

Table2D to_table(const NodalField& f) {
  const Grid& g = f.grid();
  return Table2D(g.geometry().rect, g.n1(), g.n2(), f.values());
}

EdgeWeights edge_weights(const Grid& grid, const WeightProfile& b) {
  const int n1 = grid.n1();
  const int n2 = grid.n2();
  const double r1 = grid.h2() / grid.h1();
  const double r2 = grid.h1() / grid.h2();
  EdgeWeights w;
  w.w1.assign(static_cast<std::size_t>(n1) * (n2 + 1), 0.0);
  w.w2.assign(static_cast<std::size_t>(n1 + 1) * n2, 0.0);
  auto face = [&](std::size_t a, std::size_t c, double ratio) {
    if (!grid.is_interior(a) && !grid.is_interior(c)) return 0.0;
    const Point pa = grid.node(a);
    const Point pc = grid.node(c);
    const double bm = b({0.5 * (pa.x1 + pc.x1), 0.5 * (pa.x2 + pc.x2)});
    if (!(bm > 0.0) || !std::isfinite(bm))
      throw std::invalid_argument("weight must be positive and finite at face midpoints");
    return ratio / bm;
  };
  for (int i = 0; i < n1; ++i)
    for (int j = 0; j <= n2; ++j)
      w.w1[static_cast<std::size_t>(i) * (n2 + 1) + j] =
          face(grid.node_index(i, j), grid.node_index(i + 1, j), r1);
  for (int i = 0; i <= n1; ++i)
    for (int j = 0; j < n2; ++j)
      w.w2[static_cast<std::size_t>(i) * n2 + j] =
          face(grid.node_index(i, j), grid.node_index(i, j + 1), r2);
  return w;
}

double integrate(const Field& f) { return f.grid().cell_area() * vec::sum(f.values()); }

double integrate(const Field& f, const WeightProfile& w) {
  const Grid& g = f.grid();
  return g.cell_area() *
         vec::pairwise(f.size(), [&](std::size_t k) { return f[k] * w(g.node(g.interior_node(k))); });
}

double integrate(const NodalField& f) {
  const Grid& g = f.grid();
  return vec::pairwise(f.size(), [&](std::size_t k) { return g.trapezoid_weight(k) * f[k]; });
}

double integrate(const NodalField& f, const WeightProfile& w) {
  const Grid& g = f.grid();
  return vec::pairwise(f.size(),
                       [&](std::size_t k) { return g.trapezoid_weight(k) * f[k] * w(g.node(k)); });
}

double dirichlet_energy(const Field& u, const EdgeWeights& w) {
  const Grid& g = u.grid();
  const NodalField full = expand(u);
  const int n2 = g.n2();
  const std::size_t e1 = w.w1.size();
  return vec::pairwise(e1 + w.w2.size(), [&](std::size_t e) {
    std::size_t a;
    std::size_t c;
    double we;
    if (e < e1) {
      const int i = static_cast<int>(e / (n2 + 1));
      const int j = static_cast<int>(e % (n2 + 1));
      a = g.node_index(i, j);
      c = g.node_index(i + 1, j);
      we = w.w1[e];
    } else {
      const std::size_t f = e - e1;
      const int i = static_cast<int>(f / n2);
      const int j = static_cast<int>(f % n2);
      a = g.node_index(i, j);
      c = g.node_index(i, j + 1);
      we = w.w2[f];
    }
    const double d = full[c] - full[a];
    return we * d * d;
  });
}

double dirichlet_energy(const Field& u, const WeightProfile& b) {
  return dirichlet_energy(u, edge_weights(u.grid(), b));
}

namespace {

template <class Profile>
NodalField sample(const GridPtr& grid, const Profile& profile) {
  NodalField out(grid);
  for (std::size_t k = 0; k < out.size(); ++k) {
    const double v = profile(grid->node(k));
    if (!std::isfinite(v)) {
      const Point x = grid->node(k);
      throw Error("profile evaluation is not finite at (" + std::to_string(x.x1) + ", " +
                  std::to_string(x.x2) + ")");
    }
    out[k] = v;
  }
  return out;
}

} // namespace

NodalField sample_profile(const GridPtr& grid, const WeightProfile& b) { return sample(grid, b); }
NodalField sample_profile(const GridPtr& grid, const BoundaryProfile& q) { return sample(grid, q); }

void write_field_csv(std::ostream& os, const NodalField& f) {
  const Grid& g = f.grid();
  os << "x1,x2,value\n";
  char line[96];
  for (std::size_t k = 0; k < f.size(); ++k) {
    const Point x = g.node(k);
    std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g\n", x.x1, x.x2, f[k]);
    os << line;
  }
}

} // namespace svx
