#include "svx/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "svx/grid.hpp"

namespace svx {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require(bool ok, const char* message) {
  if (!ok) throw std::invalid_argument(message);
}

// Cell coordinate with values within 1e-9 of an integer snapped to it, so
// lattice nodes hit table entries exactly.
double snapped(double f) {
  const double r = std::round(f);
  return std::abs(f - r) < 1e-9 ? r : f;
}

} // namespace

double distance(Point a, Point b) { return std::hypot(a.x1 - b.x1, a.x2 - b.x2); }

bool Rect::contains(Point p) const {
  return p.x1 >= x1_min && p.x1 <= x1_max && p.x2 >= x2_min && p.x2 <= x2_max;
}

double Rect::distance_to_edge(Point p) const {
  if (!contains(p)) return 0.0;
  return std::min({p.x1 - x1_min, x1_max - p.x1, p.x2 - x2_min, x2_max - p.x2});
}

bool MaskObstacle::contains(Point p) const {
  if (n1 <= 0 || n2 <= 0 || !extent.contains(p)) return false;
  const double dx = extent.width() / n1;
  const double dy = extent.height() / n2;
  const int i = std::clamp(static_cast<int>((p.x1 - extent.x1_min) / dx), 0, n1 - 1);
  const int j = std::clamp(static_cast<int>((p.x2 - extent.x2_min) / dy), 0, n2 - 1);
  return cells[static_cast<std::size_t>(i) * n2 + j] != 0;
}

double MaskObstacle::distance(Point p) const {
  if (contains(p)) return 0.0;
  const double dx = extent.width() / n1;
  const double dy = extent.height() / n2;
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n1; ++i)
    for (int j = 0; j < n2; ++j)
      if (cells[static_cast<std::size_t>(i) * n2 + j] != 0) {
        const Point c{extent.x1_min + (i + 0.5) * dx, extent.x2_min + (j + 0.5) * dy};
        best = std::min(best, svx::distance(p, c));
      }
  return best;
}

bool DomainGeometry::blocked(Point p) const {
  return std::visit(overloaded{
                        [](std::monostate) { return false; },
                        [&](const DiscObstacle& d) { return svx::distance(p, d.center) <= d.radius; },
                        [&](const MaskObstacle& m) { return m.contains(p); },
                    },
                    obstacle);
}

double DomainGeometry::distance_to_boundary(Point p) const {
  double d = rect.distance_to_edge(p);
  std::visit(overloaded{
                 [](std::monostate) {},
                 [&](const DiscObstacle& o) {
                   d = std::min(d, std::max(0.0, svx::distance(p, o.center) - o.radius));
                 },
                 [&](const MaskObstacle& m) { d = std::min(d, m.distance(p)); },
             },
             obstacle);
  return d;
}

void DomainGeometry::validate(double alpha) const {
  require(rect.width() > 0.0 && rect.height() > 0.0, "domain rectangle must have positive area");
  if (axis) require(rect.x1_min == 0.0, "axis flag requires x1_min = 0");
  if (axis || alpha > 0.0) require(rect.x1_min >= 0.0, "weighted domain requires x1_min >= 0");
  std::visit(overloaded{
                 [](std::monostate) {},
                 [&](const DiscObstacle& d) {
                   require(d.radius > 0.0, "obstacle radius must be positive");
                   // The disc may cross the symmetry axis; elsewhere it must stay clear
                   // of the rectangle's edges.
                   const bool left_ok = axis || d.center.x1 - d.radius > rect.x1_min;
                   require(left_ok && d.center.x1 + d.radius < rect.x1_max &&
                               d.center.x2 - d.radius > rect.x2_min &&
                               d.center.x2 + d.radius < rect.x2_max,
                           "obstacle must lie strictly inside the rectangle");
                 },
                 [&](const MaskObstacle& m) {
                   require(m.n1 > 0 && m.n2 > 0 &&
                               m.cells.size() == static_cast<std::size_t>(m.n1) * m.n2,
                           "obstacle mask size mismatch");
                   require((axis || m.extent.x1_min > rect.x1_min) && m.extent.x1_max < rect.x1_max &&
                               m.extent.x2_min > rect.x2_min && m.extent.x2_max < rect.x2_max,
                           "obstacle must lie strictly inside the rectangle");
                 },
             },
             obstacle);
}

Table2D::Table2D(Rect extent, int n1, int n2, std::vector<double> values)
    : extent_(extent), n1_(n1), n2_(n2), values_(std::move(values)) {
  require(n1 > 0 && n2 > 0, "table needs at least one cell per axis");
  require(values_.size() == static_cast<std::size_t>(n1 + 1) * (n2 + 1), "table size mismatch");
}

double Table2D::operator()(Point p) const {
  const double f1 = snapped((std::clamp(p.x1, extent_.x1_min, extent_.x1_max) - extent_.x1_min) /
                            extent_.width() * n1_);
  const double f2 = snapped((std::clamp(p.x2, extent_.x2_min, extent_.x2_max) - extent_.x2_min) /
                            extent_.height() * n2_);
  const int i = std::clamp(static_cast<int>(std::floor(f1)), 0, n1_ - 1);
  const int j = std::clamp(static_cast<int>(std::floor(f2)), 0, n2_ - 1);
  const double t = f1 - i;
  const double s = f2 - j;
  auto at = [&](int a, int b) { return values_[static_cast<std::size_t>(a) * (n2_ + 1) + b]; };
  if (t == 0.0 && s == 0.0) return at(i, j);
  return (1 - t) * (1 - s) * at(i, j) + t * (1 - s) * at(i + 1, j) + (1 - t) * s * at(i, j + 1) +
         t * s * at(i + 1, j + 1);
}

double Table2D::max_value() const { return *std::max_element(values_.begin(), values_.end()); }
double Table2D::min_value() const { return *std::min_element(values_.begin(), values_.end()); }

double WeightProfile::operator()(Point p) const {
  return std::visit(
      overloaded{
          [&](const PowerWeight& w) {
            if (w.alpha == 0.0) return 1.0;
            if (w.alpha == 1.0) return p.x1;
            return std::pow(p.x1, w.alpha);
          },
          [](const ConstantDepth& w) { return w.value; },
          [&](const GaussianBump& w) {
            const double d1 = p.x1 - w.center.x1;
            const double d2 = p.x2 - w.center.x2;
            return w.base + w.amplitude * std::exp(-(d1 * d1 + d2 * d2) / (w.width * w.width));
          },
          [&](const LinearRamp& w) { return w.base + w.slope1 * p.x1 + w.slope2 * p.x2; },
          [&](const TabulatedWeight& w) { return w.table(p); },
      },
      kind_);
}

std::string WeightProfile::name() const {
  return std::visit(overloaded{
                        [](const PowerWeight&) { return std::string("power"); },
                        [](const ConstantDepth&) { return std::string("constant"); },
                        [](const GaussianBump&) { return std::string("gaussian"); },
                        [](const LinearRamp&) { return std::string("ramp"); },
                        [](const TabulatedWeight&) { return std::string("tabulated"); },
                    },
                    kind_);
}

double WeightProfile::alpha() const {
  if (const auto* w = std::get_if<PowerWeight>(&kind_)) return w->alpha;
  return 0.0;
}

double WeightProfile::sup_over(const Rect& r) const {
  const Point corners[4] = {{r.x1_min, r.x2_min}, {r.x1_min, r.x2_max}, {r.x1_max, r.x2_min},
                            {r.x1_max, r.x2_max}};
  auto corner_max = [&] {
    double m = -std::numeric_limits<double>::infinity();
    for (const Point& c : corners) m = std::max(m, (*this)(c));
    return m;
  };
  return std::visit(overloaded{
                        [&](const PowerWeight&) { return corner_max(); },
                        [](const ConstantDepth& w) { return w.value; },
                        [&](const GaussianBump& w) {
                          if (w.amplitude < 0.0) return corner_max();
                          const Point c{std::clamp(w.center.x1, r.x1_min, r.x1_max),
                                        std::clamp(w.center.x2, r.x2_min, r.x2_max)};
                          return (*this)(c);
                        },
                        [&](const LinearRamp&) { return corner_max(); },
                        [](const TabulatedWeight& w) { return w.table.max_value(); },
                    },
                    kind_);
}

double BoundaryProfile::operator()(Point p) const {
  return std::visit(overloaded{
                        [&](const RingWholeSpace& q) { return 0.5 * q.W * p.x1 * p.x1 + q.k; },
                        [&](const RingCylinder& q) { return 0.5 * q.W * p.x1 * p.x1 + q.k; },
                        [&](const RingOutsideBall& q) {
                          if (p.x1 == 0.0) return q.k;
                          const double rho2 = p.x1 * p.x1 + p.x2 * p.x2;
                          const double dip = 1.0 - 1.0 / (rho2 * std::sqrt(rho2));
                          return 0.5 * q.W * p.x1 * p.x1 * dip + q.k;
                        },
                        [](const LakeConstant& q) { return q.value; },
                        [&](const LakeBackground& q) { return -q.psi0(p); },
                        [&](const NumericProfile& q) { return q.values(p); },
                    },
                    kind_);
}

std::string BoundaryProfile::name() const {
  return std::visit(overloaded{
                        [](const RingWholeSpace&) { return std::string("ring-whole-space"); },
                        [](const RingCylinder&) { return std::string("ring-cylinder"); },
                        [](const RingOutsideBall&) { return std::string("ring-outside-ball"); },
                        [](const LakeConstant&) { return std::string("lake-constant"); },
                        [](const LakeBackground&) { return std::string("lake-background"); },
                        [](const NumericProfile&) { return std::string("numeric"); },
                    },
                    kind_);
}

std::string to_string(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::EulerRing: return "euler-ring";
    case ScenarioKind::Lake: return "lake";
    case ScenarioKind::Custom: return "custom";
  }
  return "custom";
}

void ProblemSpec::validate() const {
  require(epsilon > 0.0 && epsilon < 1.0, "epsilon must lie in (0, 1)");
  require(p > 1.0, "exponent p must exceed 1");
  geometry.validate(weight.alpha());
  require(weight.alpha() >= 0.0, "weight exponent must be nonnegative");
}

ProblemSpec ProblemSpec::with_epsilon(double eps) const {
  ProblemSpec s = *this;
  s.epsilon = eps;
  s.validate();
  return s;
}

double ProblemSpec::log_factor() const { return -std::log(epsilon); }

double outside_ball_r_star(double c) {
  require(c >= 3.0, "2r + 1/r^2 = c has no root on [1, inf) for c < 3");
  auto f = [c](double r) { return 2.0 * r + 1.0 / (r * r) - c; };
  double lo = 1.0;
  double hi = 0.5 * c + 1.0;
  if (f(lo) >= 0.0) return lo;
  if (f(hi) <= 0.0) throw std::runtime_error("outside-ball root bracket [1, c/2+1] has no sign change");
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

DomainGeometry default_ring_box(double r_star) {
  DomainGeometry g;
  g.rect = Rect{0.0, 6.0 * r_star, -6.0 * r_star, 6.0 * r_star};
  g.axis = true;
  g.truncated = true;
  return g;
}

ProblemSpec make_whole_space_ring(double W, double kappa, const DomainGeometry& box) {
  require(W > 0.0 && kappa > 0.0, "W and kappa must be positive");
  require(box.axis, "ring domain needs the axis flag");
  const double c = kappa / two_pi;
  ProblemSpec s;
  s.geometry = box;
  s.weight = PowerWeight{1.0};
  s.profile = RingWholeSpace{W, kappa, 3.0 / (8.0 * W) * c * c};
  s.kind = ScenarioKind::EulerRing;
  s.r_star = kappa / (4.0 * std::numbers::pi * W);
  s.validate();
  return s;
}

ProblemSpec make_whole_space_ring(double W, double kappa) {
  require(W > 0.0 && kappa > 0.0, "W and kappa must be positive");
  return make_whole_space_ring(W, kappa, default_ring_box(kappa / (4.0 * std::numbers::pi * W)));
}

ProblemSpec make_cylinder_ring(double W, double kappa, double z_half) {
  require(W > 0.0 && kappa > 0.0 && z_half > 0.0, "W, kappa and the half height must be positive");
  ProblemSpec s;
  s.geometry.rect = Rect{0.0, 1.0, -z_half, z_half};
  s.geometry.axis = true;
  s.geometry.truncated = true;
  s.weight = PowerWeight{1.0};
  const double c = kappa / two_pi;
  if (kappa >= 4.0 * std::numbers::pi * W) {
    s.profile = RingCylinder{W, kappa, c - 0.5 * W, true};
    s.r_star = 1.0;
  } else {
    s.profile = RingCylinder{W, kappa, 3.0 / (8.0 * W) * c * c, false};
    s.r_star = kappa / (4.0 * std::numbers::pi * W);
  }
  s.kind = ScenarioKind::EulerRing;
  s.validate();
  return s;
}

ProblemSpec make_outside_ball_ring(double W, double kappa, const DomainGeometry& box) {
  require(W > 0.0 && kappa > 0.0, "W and kappa must be positive");
  require(box.axis, "ring domain needs the axis flag");
  const double c = kappa / (two_pi * W);
  ProblemSpec s;
  s.geometry = box;
  if (!s.geometry.has_obstacle()) s.geometry.obstacle = DiscObstacle{{0.0, 0.0}, 1.0};
  s.weight = PowerWeight{1.0};
  if (c <= 3.0) {
    s.profile = RingOutsideBall{W, kappa, kappa / two_pi, false};
    s.r_star = 1.0;
  } else {
    const double r = outside_ball_r_star(c);
    s.profile = RingOutsideBall{W, kappa, 1.5 * W * (r * r + 1.0 / r), true};
    s.r_star = r;
  }
  s.kind = ScenarioKind::EulerRing;
  s.validate();
  return s;
}

ProblemSpec make_outside_ball_ring(double W, double kappa) {
  require(W > 0.0 && kappa > 0.0, "W and kappa must be positive");
  const double c = kappa / (two_pi * W);
  const double r = c <= 3.0 ? 1.0 : outside_ball_r_star(c);
  return make_outside_ball_ring(W, kappa, default_ring_box(r));
}

namespace {

ProblemSpec lake_base(const WeightProfile& depth, const Rect& rect) {
  require(!std::holds_alternative<PowerWeight>(depth.kind()), "lake depth must be a lake profile");
  ProblemSpec s;
  s.geometry.rect = rect;
  s.weight = depth;
  s.kind = ScenarioKind::Lake;
  // Corners and center are a cheap positivity screen; nodes are checked on sampling.
  const Point probes[5] = {{rect.x1_min, rect.x2_min}, {rect.x1_min, rect.x2_max},
                           {rect.x1_max, rect.x2_min}, {rect.x1_max, rect.x2_max},
                           {0.5 * (rect.x1_min + rect.x1_max), 0.5 * (rect.x2_min + rect.x2_max)}};
  for (const Point& pr : probes) require(depth(pr) > 0.0, "lake depth must be positive");
  return s;
}

} // namespace

ProblemSpec make_lake(const WeightProfile& depth, double kappa, const Rect& rect) {
  require(kappa > 0.0, "kappa must be positive");
  ProblemSpec s = lake_base(depth, rect);
  s.profile = LakeConstant{kappa / two_pi * depth.sup_over(rect)};
  s.validate();
  return s;
}

ProblemSpec make_lake(const WeightProfile& depth, const Table2D& psi0, const Rect& rect) {
  require(psi0.max_value() < 0.0, "background stream function must be strictly negative");
  ProblemSpec s = lake_base(depth, rect);
  s.profile = LakeBackground{psi0};
  s.validate();
  return s;
}

TargetPrediction predicted_target(const ProblemSpec& spec, const Grid& grid) {
  TargetPrediction t;
  double best = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> tied;
  for (std::size_t node : grid.interior_nodes()) {
    const Point x = grid.node(node);
    const double q = spec.profile(x);
    const double ratio = q * q / spec.weight(x);
    if (ratio < best) {
      best = ratio;
      tied.clear();
    }
    if (ratio == best) tied.push_back(node);
  }
  // Profiles invariant along a direction tie exactly; take the tied node
  // nearest the middle of the tied set, lowest index first.
  Point mean;
  for (std::size_t node : tied) {
    mean.x1 += grid.node(node).x1;
    mean.x2 += grid.node(node).x2;
  }
  mean.x1 /= static_cast<double>(tied.size());
  mean.x2 /= static_cast<double>(tied.size());
  t.node = tied.front();
  for (std::size_t node : tied)
    if (distance(grid.node(node), mean) < distance(grid.node(t.node), mean)) t.node = node;
  t.point = grid.node(t.node);
  t.limit_circulation = two_pi * spec.profile(t.point) / spec.weight(t.point);
  t.limit_energy_density = best;
  t.sup_b = spec.weight.sup_over(grid.geometry().rect);
  return t;
}

} // namespace svx
