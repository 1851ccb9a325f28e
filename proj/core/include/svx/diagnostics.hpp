#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "svx/solver.hpp"

namespace svx {

struct CoreStats {
  std::vector<std::size_t> nodes;  ///< lattice indices with u > q_eps
  double area = 0.0;
  double diameter = 0.0;
  std::size_t peak_node = 0;
  Point peak;                      ///< argmax of u - q_eps
  double peak_excess = 0.0;
  Point centroid;                  ///< area-weighted mean of core nodes
  double distance_to_boundary = 0.0;
  int components = 0;              ///< 4-neighbor connected components
};

/// Throws EmptyCore when u <= q_eps everywhere.
CoreStats extract_core(const DiscreteProblem& problem, const Field& u);

/// kappa = (1/eps^2) int b (u - q_eps)_+^p, the integral of the vorticity.
double circulation(const DiscreteProblem& problem, const Field& u);

struct AsymptoticsRow {
  double epsilon = 0.0;
  double energy = 0.0;
  double kappa = 0.0;
  double kappa_normalized = 0.0;   ///< kappa b(a)/q(a)
  double kappa_gap = 0.0;          ///< |kappa b(a)/q(a) - 2 pi| / 2 pi
  double energy_ratio = 0.0;       ///< E / (pi log(1/eps))
  double q2b_at_peak = 0.0;        ///< q(a)^2 / b(a)
  double upper_bound_ratio = 0.0;  ///< E / (pi log(1/eps) inf q^2/b)
  double b_at_peak = 0.0;
  double b_gap = 0.0;              ///< |b(a) - sup b| / sup b
  double diameter = 0.0;
  double diam_over_eps = 0.0;
  double area = 0.0;
  double distance_to_boundary = 0.0;
  Point peak;
  Point centroid;
  int components = 0;
  int core_nodes = 0;
  int iterations = 0;
  bool converged = false;
  double gradient_norm = 0.0;
  double nehari_residual = 0.0;
};

AsymptoticsRow energy_report(const DiscreteProblem& problem, const SolveResult& result,
                             const TargetPrediction& target);

struct DiameterScaling {
  double slope = 0.0;      ///< least-squares slope of log diam against log eps
  double min_ratio = 0.0;  ///< min diam/eps
  double max_ratio = 0.0;
};

/// Throws std::invalid_argument with fewer than 3 rows.
DiameterScaling diameter_scaling(std::span<const AsymptoticsRow> rows);

struct AsymptoticsReport {
  std::string scenario;
  double limit_circulation = 2.0 * 3.14159265358979323846;
  double limit_energy_density = 0.0;  ///< inf q^2/b
  double sup_b = 0.0;
  Point target;
  std::vector<AsymptoticsRow> rows;
  std::optional<DiameterScaling> scaling;  ///< empty with fewer than 3 rows
  bool energy_ratio_decreasing = false;
  bool kappa_gap_decreasing = false;
  bool b_gap_decreasing = false;
};

/// Assembles a report and recomputes the cross-eps trends from the rows.
AsymptoticsReport build_report(std::string scenario, const TargetPrediction& target,
                               std::vector<AsymptoticsRow> rows);
void refresh_trends(AsymptoticsReport& report);

/// Strictly decreasing sequence (fewer than 2 values count as decreasing).
bool strictly_decreasing(std::span<const double> values);

/// Face velocities, nodal vorticity and pressure (ring) or height (lake).
struct FlowFields {
  /// First component (v_r or v1) on x2-edges, indexed like EdgeWeights::w2.
  std::vector<double> v1;
  /// Second component (v_z or v2) on x1-edges, indexed like EdgeWeights::w1.
  std::vector<double> v2;
  NodalField psi;
  NodalField vorticity;
  NodalField pressure;  ///< F(psi) - |v|^2/2
};

/// Requires an Euler ring spec (b = r); throws std::invalid_argument otherwise.
FlowFields reconstruct_euler_flow(const DiscreteProblem& problem, const Field& u);
/// Requires a lake spec; throws std::invalid_argument otherwise.
FlowFields reconstruct_lake_flow(const DiscreteProblem& problem, const Field& u);

/// max over cells of |div(b v)| h1 h2 for the stored face velocities.
double max_cell_divergence(const DiscreteProblem& problem, const FlowFields& flow);
/// Circulation of v along the dual loop enclosing nodes i0..i1 x j0..j1.
double loop_circulation(const DiscreteProblem& problem, const FlowFields& flow, int i0, int i1,
                        int j0, int j1);
/// int vorticity over the unknowns (same quadrature as circulation).
double vorticity_integral(const DiscreteProblem& problem, const FlowFields& flow);

struct StrictGap {
  double epsilon = 0.0;
  double c_exterior = 0.0;
  double c_invariant = 0.0;
  double gap = 0.0;  ///< c_invariant - c_exterior
  bool converged = false;
};

/// Solves both problems over the eps list by continuation and compares levels.
std::vector<StrictGap> strict_inequality_check(const DiscreteProblem& exterior,
                                               const DiscreteProblem& invariant,
                                               std::span<const double> eps,
                                               const SolverOptions& opts = {});

} // namespace svx
