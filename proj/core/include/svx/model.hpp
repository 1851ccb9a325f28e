#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

namespace svx {

class Grid;

struct Point {
  double x1 = 0.0;
  double x2 = 0.0;
};

double distance(Point a, Point b);

struct Rect {
  double x1_min = 0.0;
  double x1_max = 1.0;
  double x2_min = 0.0;
  double x2_max = 1.0;

  double width() const { return x1_max - x1_min; }
  double height() const { return x2_max - x2_min; }
  bool contains(Point p) const;
  /// Euclidean distance from an inside point to the rectangle's edges.
  double distance_to_edge(Point p) const;
};

struct DiscObstacle {
  Point center;
  double radius = 1.0;
};

/// Boolean raster over `extent` with n1 x n2 cells stored row-major in x1.
/// A point is blocked when the cell containing it is set.
struct MaskObstacle {
  Rect extent;
  int n1 = 0;
  int n2 = 0;
  std::vector<std::uint8_t> cells;

  bool contains(Point p) const;
  /// Distance to the nearest blocked cell center (0 inside).
  double distance(Point p) const;
};

using Obstacle = std::variant<std::monostate, DiscObstacle, MaskObstacle>;

struct DomainGeometry {
  Rect rect;
  bool axis = false;       ///< x1 = x1_min = 0 is the symmetry axis r = 0
  Obstacle obstacle;       ///< closed set removed from the domain
  bool truncated = false;  ///< rect truncates an unbounded domain

  bool has_obstacle() const { return !std::holds_alternative<std::monostate>(obstacle); }
  bool blocked(Point p) const;
  /// Distance from p to the domain boundary (rectangle edges, axis and obstacle).
  double distance_to_boundary(Point p) const;
  /// Throws std::invalid_argument on a malformed geometry.
  void validate(double alpha = 0.0) const;
};

/// Nodal table on a uniform lattice with bilinear interpolation.
class Table2D {
public:
  Table2D() = default;
  /// `values` has (n1+1)(n2+1) entries in lexicographic (i, j) order, j fastest.
  Table2D(Rect extent, int n1, int n2, std::vector<double> values);

  double operator()(Point p) const;
  const Rect& extent() const { return extent_; }
  int n1() const { return n1_; }
  int n2() const { return n2_; }
  const std::vector<double>& values() const { return values_; }
  double max_value() const;
  double min_value() const;

private:
  Rect extent_;
  int n1_ = 0;
  int n2_ = 0;
  std::vector<double> values_;
};

struct PowerWeight {
  double alpha = 1.0;  ///< b = x1^alpha
};
struct ConstantDepth {
  double value = 1.0;
};
/// b = base + amplitude * exp(-|x - center|^2 / width^2)
struct GaussianBump {
  double base = 1.0;
  double amplitude = 1.0;
  Point center;
  double width = 1.0;
};
/// b = base + slope1 * x1 + slope2 * x2
struct LinearRamp {
  double base = 1.0;
  double slope1 = 0.0;
  double slope2 = 0.0;
};
struct TabulatedWeight {
  Table2D table;
};

class WeightProfile {
public:
  using Kind = std::variant<PowerWeight, ConstantDepth, GaussianBump, LinearRamp, TabulatedWeight>;

  WeightProfile() : kind_(ConstantDepth{}) {}
  WeightProfile(Kind kind) : kind_(std::move(kind)) {}
  template <class Alt>
    requires std::is_constructible_v<Kind, Alt>
  WeightProfile(Alt alt) : kind_(std::move(alt)) {}

  double operator()(Point p) const;
  const Kind& kind() const { return kind_; }
  std::string name() const;
  /// Exponent of a power weight, 0 otherwise.
  double alpha() const;
  /// Supremum over the closed rectangle (exact for the analytic kinds).
  double sup_over(const Rect& r) const;

private:
  Kind kind_;
};

/// q = W r^2/2 + k, k = (3/(8W)) (kappa/2pi)^2.
struct RingWholeSpace {
  double W = 1.0;
  double kappa = 1.0;
  double k = 0.0;
};
/// Cylinder of radius 1; for kappa >= 4 pi W, q = W r^2/2 + (kappa/2pi - W/2).
struct RingCylinder {
  double W = 1.0;
  double kappa = 1.0;
  double k = 0.0;
  bool wall_branch = false;
};
/// Exterior of the unit ball: q = (W/2) r^2 (1 - (r^2+z^2)^(-3/2)) + k.
struct RingOutsideBall {
  double W = 1.0;
  double kappa = 1.0;
  double k = 0.0;
  bool far_branch = false;  ///< kappa > 6 pi W
};
struct LakeConstant {
  double value = 1.0;
};
/// q = -psi0 for a strictly negative background stream function.
struct LakeBackground {
  Table2D psi0;
};
/// Nodal q, typically from solve_weighted_harmonic.
struct NumericProfile {
  Table2D values;
};

class BoundaryProfile {
public:
  using Kind = std::variant<RingWholeSpace, RingCylinder, RingOutsideBall, LakeConstant,
                            LakeBackground, NumericProfile>;

  BoundaryProfile() : kind_(LakeConstant{}) {}
  BoundaryProfile(Kind kind) : kind_(std::move(kind)) {}
  template <class Alt>
    requires std::is_constructible_v<Kind, Alt>
  BoundaryProfile(Alt alt) : kind_(std::move(alt)) {}

  double operator()(Point p) const;
  const Kind& kind() const { return kind_; }
  std::string name() const;

private:
  Kind kind_;
};

enum class ScenarioKind { EulerRing, Lake, Custom };

std::string to_string(ScenarioKind kind);

struct ProblemSpec {
  DomainGeometry geometry;
  WeightProfile weight;
  BoundaryProfile profile;
  double epsilon = 0.1;
  double p = 2.0;
  ScenarioKind kind = ScenarioKind::Custom;
  double r_star = 0.0;  ///< predicted concentration radius for rings, 0 if not applicable

  /// Throws std::invalid_argument when an invariant is violated.
  void validate() const;
  ProblemSpec with_epsilon(double eps) const;
  /// q_eps = log(1/eps) q.
  double log_factor() const;
};

/// Root of 2r + 1/r^2 = c on [1, inf), c >= 3.
double outside_ball_r_star(double c);

/// Axisymmetric truncation box (0, 6 r*) x (-6 r*, 6 r*).
DomainGeometry default_ring_box(double r_star);

ProblemSpec make_whole_space_ring(double W, double kappa, const DomainGeometry& box);
ProblemSpec make_whole_space_ring(double W, double kappa);
ProblemSpec make_cylinder_ring(double W, double kappa, double z_half = 3.0);
/// The unit disc obstacle at the origin is added when `box` has none.
ProblemSpec make_outside_ball_ring(double W, double kappa, const DomainGeometry& box);
ProblemSpec make_outside_ball_ring(double W, double kappa);
/// Constant mode: q = (kappa/2pi) sup b.
ProblemSpec make_lake(const WeightProfile& depth, double kappa, const Rect& rect);
/// Background mode: q = -psi0.
ProblemSpec make_lake(const WeightProfile& depth, const Table2D& psi0, const Rect& rect);

struct TargetPrediction {
  Point point;
  std::size_t node = 0;               ///< lattice node index
  double limit_circulation = 0.0;     ///< 2 pi q / b at the point
  double limit_energy_density = 0.0;  ///< inf q^2 / b over interior nodes
  double sup_b = 0.0;                 ///< sup b over the closed rectangle
};

/// Argmin of q^2/b over the interior nodes of `grid`. Exact ties go to the tied
/// node nearest the mean of the tied set, lowest index first.
TargetPrediction predicted_target(const ProblemSpec& spec, const Grid& grid);

} // namespace svx
