#include "svx/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "svx/error.hpp"
#include "svx/vec.hpp"

namespace svx {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

std::vector<double> nodal_psi(const DiscreteProblem& problem, const Field& u) {
  const NodalField full = expand(u);
  const double L = problem.log_factor();
  std::vector<double> psi(full.size());
  for (std::size_t k = 0; k < psi.size(); ++k) psi[k] = full[k] - L * problem.q_nodal()[k];
  return psi;
}

} // namespace

CoreStats extract_core(const DiscreteProblem& problem, const Field& u) {
  const Grid& g = problem.grid();
  const auto& qe = problem.q_eps();
  std::vector<std::uint8_t> in_core(g.node_count(), 0);
  CoreStats s;
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < u.size(); ++k) {
    if (!std::isfinite(u[k])) throw std::invalid_argument("field has non-finite values");
    const double psi = u[k] - qe[k];
    if (psi > 0.0) {
      const std::size_t node = g.interior_node(k);
      in_core[node] = 1;
      s.nodes.push_back(node);
      if (psi > best) {
        best = psi;
        s.peak_node = node;
      }
    }
  }
  if (s.nodes.empty()) throw EmptyCore("u <= q_eps at every node");
  s.peak = g.node(s.peak_node);
  s.peak_excess = best;
  s.area = g.cell_area() * static_cast<double>(s.nodes.size());

  double c1 = 0.0;
  double c2 = 0.0;
  double dist = std::numeric_limits<double>::infinity();
  for (std::size_t node : s.nodes) {
    const Point x = g.node(node);
    c1 += x.x1;
    c2 += x.x2;
    dist = std::min(dist, g.geometry().distance_to_boundary(x));
  }
  s.centroid = {c1 / s.nodes.size(), c2 / s.nodes.size()};
  s.distance_to_boundary = dist;

  const int n1 = g.n1();
  const int n2 = g.n2();
  auto neighbors = [&](std::size_t node, auto&& fn) {
    const int i = g.i_of(node);
    const int j = g.j_of(node);
    if (i > 0) fn(g.node_index(i - 1, j));
    if (i < n1) fn(g.node_index(i + 1, j));
    if (j > 0) fn(g.node_index(i, j - 1));
    if (j < n2) fn(g.node_index(i, j + 1));
  };

  std::vector<std::uint8_t> seen(g.node_count(), 0);
  std::vector<std::size_t> stack;
  for (std::size_t start : s.nodes) {
    if (seen[start]) continue;
    ++s.components;
    seen[start] = 1;
    stack.push_back(start);
    while (!stack.empty()) {
      const std::size_t cur = stack.back();
      stack.pop_back();
      neighbors(cur, [&](std::size_t nb) {
        if (in_core[nb] && !seen[nb]) {
          seen[nb] = 1;
          stack.push_back(nb);
        }
      });
    }
  }

  std::vector<Point> rim;
  for (std::size_t node : s.nodes) {
    bool edge = false;
    neighbors(node, [&](std::size_t nb) { edge = edge || !in_core[nb]; });
    if (edge) rim.push_back(g.node(node));
  }
  double diam2 = 0.0;
  for (std::size_t a = 0; a < rim.size(); ++a)
    for (std::size_t b = a + 1; b < rim.size(); ++b) {
      const double d1 = rim[a].x1 - rim[b].x1;
      const double d2 = rim[a].x2 - rim[b].x2;
      diam2 = std::max(diam2, d1 * d1 + d2 * d2);
    }
  s.diameter = std::sqrt(diam2);
  return s;
}

double circulation(const DiscreteProblem& problem, const Field& u) {
  const auto& b = problem.b();
  const auto& qe = problem.q_eps();
  const double p = problem.p();
  const double s = vec::pairwise(u.size(), [&](std::size_t k) {
    return b[k] * positive_power(u[k] - qe[k], p);
  });
  return problem.mass() * s / (problem.epsilon() * problem.epsilon());
}

AsymptoticsRow energy_report(const DiscreteProblem& problem, const SolveResult& result,
                             const TargetPrediction& target) {
  const CoreStats core = extract_core(problem, result.u);
  const double L = problem.log_factor();
  const double eps = problem.epsilon();
  AsymptoticsRow row;
  row.epsilon = eps;
  row.energy = result.energy.total;
  row.kappa = circulation(problem, result.u);
  const double ba = problem.b_nodal()[core.peak_node];
  const double qa = problem.q_nodal()[core.peak_node];
  row.kappa_normalized = row.kappa * ba / qa;
  row.kappa_gap = std::abs(row.kappa_normalized - two_pi) / two_pi;
  row.energy_ratio = row.energy / (std::numbers::pi * L);
  row.q2b_at_peak = qa * qa / ba;
  row.upper_bound_ratio = row.energy_ratio / target.limit_energy_density;
  row.b_at_peak = ba;
  row.b_gap = std::abs(ba - target.sup_b) / target.sup_b;
  row.diameter = core.diameter;
  row.diam_over_eps = core.diameter / eps;
  row.area = core.area;
  row.distance_to_boundary = core.distance_to_boundary;
  row.peak = core.peak;
  row.centroid = core.centroid;
  row.components = core.components;
  row.core_nodes = static_cast<int>(core.nodes.size());
  row.iterations = result.iterations;
  row.converged = result.converged;
  row.gradient_norm = result.gradient_norm;
  row.nehari_residual = result.nehari_residual;
  return row;
}

DiameterScaling diameter_scaling(std::span<const AsymptoticsRow> rows) {
  if (rows.size() < 3) throw std::invalid_argument("diameter scaling needs at least 3 points");
  const double n = static_cast<double>(rows.size());
  double sx = 0.0;
  double sy = 0.0;
  for (const auto& r : rows) {
    sx += std::log(r.epsilon);
    sy += std::log(r.diameter);
  }
  const double mx = sx / n;
  const double my = sy / n;
  double sxx = 0.0;
  double sxy = 0.0;
  for (const auto& r : rows) {
    const double dx = std::log(r.epsilon) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(r.diameter) - my);
  }
  DiameterScaling d;
  d.slope = sxy / sxx;
  d.min_ratio = std::numeric_limits<double>::infinity();
  d.max_ratio = -std::numeric_limits<double>::infinity();
  for (const auto& r : rows) {
    d.min_ratio = std::min(d.min_ratio, r.diam_over_eps);
    d.max_ratio = std::max(d.max_ratio, r.diam_over_eps);
  }
  return d;
}

bool strictly_decreasing(std::span<const double> values) {
  for (std::size_t k = 1; k < values.size(); ++k)
    if (!(values[k] < values[k - 1])) return false;
  return true;
}

void refresh_trends(AsymptoticsReport& report) {
  std::vector<double> ub;
  std::vector<double> kg;
  std::vector<double> bg;
  for (const auto& r : report.rows) {
    ub.push_back(r.upper_bound_ratio);
    kg.push_back(r.kappa_gap);
    bg.push_back(r.b_gap);
  }
  report.energy_ratio_decreasing = strictly_decreasing(ub);
  report.kappa_gap_decreasing = strictly_decreasing(kg);
  report.b_gap_decreasing = strictly_decreasing(bg);
  report.scaling.reset();
  if (report.rows.size() >= 3) report.scaling = diameter_scaling(report.rows);
}

AsymptoticsReport build_report(std::string scenario, const TargetPrediction& target,
                               std::vector<AsymptoticsRow> rows) {
  AsymptoticsReport rep;
  rep.scenario = std::move(scenario);
  rep.limit_circulation = two_pi;
  rep.limit_energy_density = target.limit_energy_density;
  rep.sup_b = target.sup_b;
  rep.target = target.point;
  rep.rows = std::move(rows);
  refresh_trends(rep);
  return rep;
}

namespace {

// Face velocities from psi: v1 = s1 d2(psi)/b on x2-edges, v2 = s2 d1(psi)/b
// on x1-edges; (s1, s2) = (-1, 1) for rings and (1, -1) for lakes.
FlowFields reconstruct(const DiscreteProblem& problem, const Field& u, double s1, double s2) {
  const Grid& g = problem.grid();
  const int n1 = g.n1();
  const int n2 = g.n2();
  const double eps2 = problem.epsilon() * problem.epsilon();
  const double p = problem.p();
  const WeightProfile& b = problem.spec().weight;
  FlowFields f;
  f.psi = NodalField(problem.grid_ptr(), nodal_psi(problem, u));
  f.v1.assign(static_cast<std::size_t>(n1 + 1) * n2, 0.0);
  f.v2.assign(static_cast<std::size_t>(n1) * (n2 + 1), 0.0);
  for (int i = 0; i <= n1; ++i)
    for (int j = 0; j < n2; ++j) {
      const Point a = g.node(i, j);
      const double bm = b({a.x1, a.x2 + 0.5 * g.h2()});
      if (bm <= 0.0) continue;  // axis faces
      const double d = (f.psi[g.node_index(i, j + 1)] - f.psi[g.node_index(i, j)]) / g.h2();
      f.v1[static_cast<std::size_t>(i) * n2 + j] = s1 * d / bm;
    }
  for (int i = 0; i < n1; ++i)
    for (int j = 0; j <= n2; ++j) {
      const Point a = g.node(i, j);
      const double bm = b({a.x1 + 0.5 * g.h1(), a.x2});
      if (bm <= 0.0) continue;
      const double d = (f.psi[g.node_index(i + 1, j)] - f.psi[g.node_index(i, j)]) / g.h1();
      f.v2[static_cast<std::size_t>(i) * (n2 + 1) + j] = s2 * d / bm;
    }
  f.vorticity = NodalField(problem.grid_ptr());
  f.pressure = NodalField(problem.grid_ptr());
  for (int i = 0; i <= n1; ++i)
    for (int j = 0; j <= n2; ++j) {
      const std::size_t node = g.node_index(i, j);
      const double psi_plus = g.is_interior(node) ? std::max(f.psi[node], 0.0) : 0.0;
      f.vorticity[node] = problem.b_nodal()[node] * positive_power(psi_plus, p) / eps2;
      double a1 = 0.0;
      int c1 = 0;
      if (j > 0) a1 += std::pow(f.v1[static_cast<std::size_t>(i) * n2 + j - 1], 2), ++c1;
      if (j < n2) a1 += std::pow(f.v1[static_cast<std::size_t>(i) * n2 + j], 2), ++c1;
      double a2 = 0.0;
      int c2 = 0;
      if (i > 0) a2 += std::pow(f.v2[static_cast<std::size_t>(i - 1) * (n2 + 1) + j], 2), ++c2;
      if (i < n1) a2 += std::pow(f.v2[static_cast<std::size_t>(i) * (n2 + 1) + j], 2), ++c2;
      const double speed2 = a1 / c1 + a2 / c2;
      const double F = positive_power(psi_plus, p + 1.0) / ((p + 1.0) * eps2);
      f.pressure[node] = F - 0.5 * speed2;
    }
  return f;
}

} // namespace

FlowFields reconstruct_euler_flow(const DiscreteProblem& problem, const Field& u) {
  const ProblemSpec& s = problem.spec();
  if (s.kind != ScenarioKind::EulerRing || s.weight.alpha() != 1.0)
    throw std::invalid_argument("Euler reconstruction needs a ring scenario with b = r");
  return reconstruct(problem, u, -1.0, 1.0);
}

FlowFields reconstruct_lake_flow(const DiscreteProblem& problem, const Field& u) {
  if (problem.spec().kind != ScenarioKind::Lake)
    throw std::invalid_argument("lake reconstruction needs a lake scenario");
  return reconstruct(problem, u, 1.0, -1.0);
}

double max_cell_divergence(const DiscreteProblem& problem, const FlowFields& flow) {
  const Grid& g = problem.grid();
  const int n1 = g.n1();
  const int n2 = g.n2();
  const WeightProfile& b = problem.spec().weight;
  auto bv1 = [&](int i, int j) {
    const Point a = g.node(i, j);
    return b({a.x1, a.x2 + 0.5 * g.h2()}) * flow.v1[static_cast<std::size_t>(i) * n2 + j];
  };
  auto bv2 = [&](int i, int j) {
    const Point a = g.node(i, j);
    return b({a.x1 + 0.5 * g.h1(), a.x2}) * flow.v2[static_cast<std::size_t>(i) * (n2 + 1) + j];
  };
  double worst = 0.0;
  for (int i = 0; i < n1; ++i)
    for (int j = 0; j < n2; ++j) {
      const double div = g.h2() * (bv1(i + 1, j) - bv1(i, j)) + g.h1() * (bv2(i, j + 1) - bv2(i, j));
      worst = std::max(worst, std::abs(div));
    }
  return worst;
}

double loop_circulation(const DiscreteProblem& problem, const FlowFields& flow, int i0, int i1, int j0,
                        int j1) {
  const Grid& g = problem.grid();
  const int n1 = g.n1();
  const int n2 = g.n2();
  if (i0 < 1 || j0 < 1 || i1 >= n1 || j1 >= n2 || i0 > i1 || j0 > j1)
    throw std::invalid_argument("loop must enclose a node block away from the lattice edge");
  auto v1 = [&](int i, int j) { return flow.v1[static_cast<std::size_t>(i) * n2 + j]; };
  auto v2 = [&](int i, int j) { return flow.v2[static_cast<std::size_t>(i) * (n2 + 1) + j]; };
  // Counter-clockwise in (x1, x2) through cell centers.
  double ccw = 0.0;
  for (int j = j0; j <= j1; ++j) ccw += (v2(i1, j) - v2(i0 - 1, j)) * g.h2();
  for (int i = i0; i <= i1; ++i) ccw += (v1(i, j0 - 1) - v1(i, j1)) * g.h1();
  // Rings are oriented by e_theta, which is clockwise in the (r, z) plane.
  return problem.spec().kind == ScenarioKind::EulerRing ? -ccw : ccw;
}

double vorticity_integral(const DiscreteProblem& problem, const FlowFields& flow) {
  const Grid& g = problem.grid();
  return g.cell_area() * vec::pairwise(g.interior_count(), [&](std::size_t k) {
           return flow.vorticity[g.interior_node(k)];
         });
}

std::vector<StrictGap> strict_inequality_check(const DiscreteProblem& exterior,
                                               const DiscreteProblem& invariant,
                                               std::span<const double> eps, const SolverOptions& opts) {
  const std::vector<SolveResult> ext = continuation(exterior, eps, opts);
  const std::vector<SolveResult> inv = continuation(invariant, eps, opts);
  if (ext.size() != eps.size() || inv.size() != eps.size() || !ext.back().converged ||
      !inv.back().converged)
    throw Error("strict-inequality check: a solve did not converge");
  std::vector<StrictGap> out;
  for (std::size_t k = 0; k < eps.size(); ++k) {
    StrictGap s;
    s.epsilon = eps[k];
    s.c_exterior = ext[k].energy.total;
    s.c_invariant = inv[k].energy.total;
    s.gap = s.c_invariant - s.c_exterior;
    s.converged = ext[k].converged && inv[k].converged;
    out.push_back(s);
  }
  return out;
}

} // namespace svx
