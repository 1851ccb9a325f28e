#pragma once

#include <cstddef>
#include <iosfwd>
#include <memory>
#include <vector>

#include "svx/model.hpp"

namespace svx {

/// Uniform tensor lattice over the bounding rectangle with n1 x n2 cells.
/// Nodes are numbered lexicographically, node(i, j) = i (n2+1) + j.
/// Unknowns are the nodes off the rectangle edges and outside the obstacle.
class Grid {
public:
  Grid(DomainGeometry geometry, int n1, int n2);

  static std::shared_ptr<const Grid> create(DomainGeometry geometry, int n1, int n2);

  const DomainGeometry& geometry() const { return geometry_; }
  int n1() const { return n1_; }
  int n2() const { return n2_; }
  double h1() const { return h1_; }
  double h2() const { return h2_; }
  /// Quadrature mass of one interior node.
  double cell_area() const { return h1_ * h2_; }

  std::size_t node_count() const { return static_cast<std::size_t>(n1_ + 1) * (n2_ + 1); }
  std::size_t node_index(int i, int j) const {
    return static_cast<std::size_t>(i) * (n2_ + 1) + static_cast<std::size_t>(j);
  }
  int i_of(std::size_t node) const { return static_cast<int>(node / (n2_ + 1)); }
  int j_of(std::size_t node) const { return static_cast<int>(node % (n2_ + 1)); }
  Point node(int i, int j) const;
  Point node(std::size_t node) const { return this->node(i_of(node), j_of(node)); }

  std::size_t interior_count() const { return interior_nodes_.size(); }
  /// Unknown index of a lattice node, -1 for Dirichlet nodes.
  std::ptrdiff_t interior_index(std::size_t node) const { return index_map_[node]; }
  bool is_interior(std::size_t node) const { return index_map_[node] >= 0; }
  std::size_t interior_node(std::size_t k) const { return interior_nodes_[k]; }
  const std::vector<std::size_t>& interior_nodes() const { return interior_nodes_; }
  bool blocked(std::size_t node) const { return blocked_[node] != 0; }

  /// Trapezoid weight of a lattice node; zero for obstacle nodes.
  double trapezoid_weight(std::size_t node) const;

private:
  DomainGeometry geometry_;
  int n1_;
  int n2_;
  double h1_;
  double h2_;
  std::vector<std::ptrdiff_t> index_map_;
  std::vector<std::size_t> interior_nodes_;
  std::vector<std::uint8_t> blocked_;
};

using GridPtr = std::shared_ptr<const Grid>;

/// One value per unknown; Dirichlet nodes are implicitly zero.
class Field {
public:
  Field() = default;
  explicit Field(GridPtr grid);
  Field(GridPtr grid, std::vector<double> values);

  const Grid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t k) const { return values_[k]; }
  double& operator[](std::size_t k) { return values_[k]; }
  std::vector<double>& values() { return values_; }
  const std::vector<double>& values() const { return values_; }

private:
  GridPtr grid_;
  std::vector<double> values_;
};

/// One value per lattice node, boundary included (profile-type fields).
class NodalField {
public:
  NodalField() = default;
  explicit NodalField(GridPtr grid);
  NodalField(GridPtr grid, std::vector<double> values);

  const Grid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t k) const { return values_[k]; }
  double& operator[](std::size_t k) { return values_[k]; }
  std::vector<double>& values() { return values_; }
  const std::vector<double>& values() const { return values_; }

private:
  GridPtr grid_;
  std::vector<double> values_;
};

/// Zero extension of an interior field to all lattice nodes.
NodalField expand(const Field& f);
/// Interior values of a nodal field.
Field restrict_to_interior(const NodalField& f);
/// Nodal values as a bilinear table over the bounding rectangle.
Table2D to_table(const NodalField& f);

/// Face weights of the div-form stencil. x1-edge (i,j)-(i+1,j) is stored at
/// i (n2+1) + j with weight (h2/h1)/b(midpoint); x2-edge (i,j)-(i,j+1) at
/// i n2 + j with weight (h1/h2)/b(midpoint). Edges joining two Dirichlet
/// nodes carry weight 0.
struct EdgeWeights {
  std::vector<double> w1;
  std::vector<double> w2;
};

EdgeWeights edge_weights(const Grid& grid, const WeightProfile& b);

/// Calls fn(node_a, node_b, weight) for every edge with nonzero weight, x1-edges first.
template <class Fn>
void for_each_edge(const Grid& grid, const EdgeWeights& w, Fn&& fn) {
  const int n1 = grid.n1();
  const int n2 = grid.n2();
  for (int i = 0; i < n1; ++i)
    for (int j = 0; j <= n2; ++j) {
      const double we = w.w1[static_cast<std::size_t>(i) * (n2 + 1) + j];
      if (we != 0.0) fn(grid.node_index(i, j), grid.node_index(i + 1, j), we);
    }
  for (int i = 0; i <= n1; ++i)
    for (int j = 0; j < n2; ++j) {
      const double we = w.w2[static_cast<std::size_t>(i) * n2 + j];
      if (we != 0.0) fn(grid.node_index(i, j), grid.node_index(i, j + 1), we);
    }
}

/// Sum of m f over unknowns (exact dual of the stencil's mass weighting).
double integrate(const Field& f);
double integrate(const Field& f, const WeightProfile& w);
/// Trapezoid rule over the lattice; exact for constants on full rectangles.
double integrate(const NodalField& f);
double integrate(const NodalField& f, const WeightProfile& w);

/// int |grad u|^2 / b as a sum over faces.
double dirichlet_energy(const Field& u, const EdgeWeights& w);
double dirichlet_energy(const Field& u, const WeightProfile& b);

/// Nodal evaluation on every lattice node; throws svx::Error on non-finite values.
NodalField sample_profile(const GridPtr& grid, const WeightProfile& b);
NodalField sample_profile(const GridPtr& grid, const BoundaryProfile& q);

/// CSV with header x1,x2,value in lexicographic node order.
void write_field_csv(std::ostream& os, const NodalField& f);

} // namespace svx
