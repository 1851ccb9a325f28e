#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "svx/energy.hpp"

namespace svx {

struct SolverOptions {
  double tol = 1e-8;             ///< on ||g||_A / max(1, ||u||_A)
  int max_iterations = 5000;
  double shrink = 0.5;           ///< backtracking factor
  double max_step = 64.0;        ///< cap on the descent step, which doubles after each success
  double armijo = 1e-4;
  int max_backtracks = 60;
  int reproject_every = 1;
  /// Curvature pairs kept for quasi-Newton directions; 0 gives plain gradient descent.
  int memory = 8;
  bool warm_start = true;
  LinearBackend lift = LinearBackend::Cholesky;
  /// CG lift tolerances: loose far from the solution, 0.1 tol near it.
  double cg_tol_early = 1e-2;
  /// Relative gradient below which safeguarded Newton steps are tried.
  double newton_switch = 1e-3;
  int newton_backtracks = 4;
  double minres_tol = 1e-6;
  int minres_max_iterations = 400;
};

/// Throws std::invalid_argument when an option is out of range.
void validate(const SolverOptions& opts);

enum class SolveStatus { Converged, MaxIterations, Stalled };

std::string to_string(SolveStatus status);

struct TraceEntry {
  int iteration = 0;
  double energy = 0.0;
  double gradient_norm = 0.0;  ///< relative Sobolev norm before the step
  double step = 0.0;
  bool newton = false;
};

struct SolveResult {
  Field u;
  double epsilon = 0.0;
  EnergyBreakdown energy;
  double gradient_norm = 0.0;     ///< ||g||_A / max(1, ||u||_A)
  double nehari_residual = 0.0;   ///< |h(1)| / ||u||_A^2
  int iterations = 0;
  bool converged = false;
  SolveStatus status = SolveStatus::MaxIterations;
  double wall_time = 0.0;         ///< seconds; never written to reports
  double min_value = 0.0;         ///< most negative nodal value (flagged, not clamped)
  std::vector<TraceEntry> trace;
};

/// v(x) = q(x) (U((x-c)/eps) + log(tau/eps)) phi(|x-c|/rho), rho = half the
/// distance from c to the boundary.
Field initial_guess(const DiscreteProblem& problem, Point center, double tau);

/// Root of g(tau) = <E'(v^tau), v^tau>/log(1/eps) on [1e-3, 1e3]; 1 without a bracket.
double choose_tau(const DiscreteProblem& problem, Point center);

/// Argmin of q^2/b over unknowns whose distance to the boundary is at least
/// 2 eps; among exact ties, the one nearest the mean of the tied set. Falls
/// back to the deepest node when none qualifies.
Point default_center(const DiscreteProblem& problem);

/// Least-energy critical point on the Nehari manifold by Sobolev-gradient
/// descent, refined by safeguarded Newton steps near convergence.
SolveResult minimize(const DiscreteProblem& problem, const Field& u0, const SolverOptions& opts = {});

/// Solves the largest eps from initial_guess and warm-starts each following eps.
/// Stops after the first non-converged solve. `on_solved` sees each result as
/// soon as it is available, with the problem at that eps.
using SolvedCallback = std::function<void(const DiscreteProblem&, const SolveResult&)>;

std::vector<SolveResult> continuation(const DiscreteProblem& problem, std::span<const double> eps,
                                      const SolverOptions& opts = {},
                                      std::optional<Point> center = std::nullopt,
                                      const SolvedCallback& on_solved = {});

} // namespace svx
