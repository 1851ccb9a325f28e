#include "checks.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <sstream>

#include "svx/diagnostics.hpp"
#include "svx/energy.hpp"
#include "svx/error.hpp"
#include "svx/grid.hpp"

namespace svx::cli {

namespace {

using Rng = std::mt19937_64;

double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

// Values spread around q_eps so that roughly half the unknowns sit in the core.
Field random_field(const DiscreteProblem& problem, Rng& rng) {
  Field u(problem.grid_ptr());
  const auto& qe = problem.q_eps();
  for (std::size_t k = 0; k < u.size(); ++k) u[k] = qe[k] * uniform(rng, 0.0, 2.0);
  return u;
}

DiscreteProblem small_problem(const RunConfig& c, int cap) {
  const int n1 = std::min(c.n1, cap);
  const int n2 = std::min(c.n2, cap);
  ProblemSpec spec = c.spec;
  spec.epsilon = c.epsilons.front();
  return DiscreteProblem(spec, Grid::create(spec.geometry, n1, n2));
}

CheckResult gradient_check(const RunConfig& c, Rng& rng) {
  CheckResult r{"gradient", true, 0, 0.0, 1e-6, "central differences of E against <E'(u), d>"};
  const DiscreteProblem problem = small_problem(c, 16);
  for (int s = 0; s < c.checks.samples; ++s) {
    const Field u = random_field(problem, rng);
    Field d(problem.grid_ptr());
    for (double& v : d.values()) v = uniform(rng, -1.0, 1.0);
    Field g = gradient(problem, u);
    if (c.hooks.corrupt_gradient)
      for (double& v : g.values()) v *= 1.0 + 1e-3;
    double analytic = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) analytic += g[k] * d[k];
    const double t = 1e-5;
    Field up = u;
    Field um = u;
    for (std::size_t k = 0; k < u.size(); ++k) {
      up[k] += t * d[k];
      um[k] -= t * d[k];
    }
    const double fd = (energy(problem, up).total - energy(problem, um).total) / (2.0 * t);
    const double scale = std::max(std::abs(fd), std::abs(analytic));
    const double err = scale > 0.0 ? std::abs(fd - analytic) / scale : 0.0;
    r.worst = std::max(r.worst, err);
    ++r.cases;
  }
  r.passed = r.worst <= r.threshold;
  return r;
}

CheckResult lower_bound_check(const RunConfig& c, Rng& rng) {
  CheckResult r{"lower_bound", true, 0, 0.0, -1e-12, "min residual / scale, p in {1.5, 2, 3}"};
  double worst = std::numeric_limits<double>::infinity();
  for (double p : {1.5, 2.0, 3.0}) {
    RunConfig cp = c;
    cp.spec.p = p;
    const DiscreteProblem problem = small_problem(cp, 16);
    for (int s = 0; s < c.checks.samples; ++s) {
      const Field u = random_field(problem, rng);
      const double res = energy_lower_bound_residual(problem, u);
      const double scale = energy_lower_bound_scale(problem, u);
      worst = std::min(worst, scale > 0.0 ? res / scale : res);
      ++r.cases;
    }
  }
  r.worst = worst;
  r.passed = worst >= r.threshold;
  return r;
}

CheckResult nehari_check(const RunConfig& c, Rng& rng) {
  CheckResult r{"nehari", true, 0, 0.0, 1e-10, "|h(1)|/Q after projection; ray maximum at 4 t"};
  const DiscreteProblem problem = small_problem(c, 16);
  bool ray_ok = true;
  for (int s = 0; s < c.checks.samples; ++s) {
    const Field u = random_field(problem, rng);
    const NehariProjection proj = nehari_project(problem, u);
    const double Q = problem.op().quadratic_form(proj.projected.values());
    r.worst = std::max(r.worst, std::abs(nehari_h(problem, proj.projected, 1.0)) / Q);
    const double e0 = energy(problem, proj.projected).total;
    for (double t : {0.5, 0.9, 1.1, 2.0}) {
      Field v = proj.projected;
      for (double& x : v.values()) x *= t;
      if (energy(problem, v).total > e0 + 1e-12 * std::abs(e0)) ray_ok = false;
    }
    ++r.cases;
  }
  r.passed = r.worst <= r.threshold && ray_ok;
  if (!ray_ok) r.note += " (ray maximum violated)";
  return r;
}

CheckResult hardy_suite(int samples, Rng& rng) {
  CheckResult r{"hardy", true, 0, 0.0, 1.05, "LHS / (constant RHS), smooth bumps, alpha in {0, 1}"};
  DomainGeometry geo;
  geo.rect = Rect{0.0, 1.0, 0.0, 1.0};
  const GridPtr grid = Grid::create(geo, 64, 64);
  const int per_alpha = std::max(1, samples / 2);
  for (double alpha : {0.0, 1.0}) {
    for (int s = 0; s < per_alpha; ++s) {
      const Point c{uniform(rng, 0.1, 0.9), uniform(rng, 0.1, 0.9)};
      const double w = uniform(rng, 0.05, 0.3);
      Field u(grid);
      for (std::size_t k = 0; k < u.size(); ++k) {
        const Point x = grid->node(grid->interior_node(k));
        const double d2 = (x.x1 - c.x1) * (x.x1 - c.x1) + (x.x2 - c.x2) * (x.x2 - c.x2);
        u[k] = std::exp(-d2 / (w * w)) * x.x1 * (1.0 - x.x1) * x.x2 * (1.0 - x.x2);
      }
      const HardyResult h = hardy_check(grid, alpha, u, 0.05);
      r.worst = std::max(r.worst, h.lhs / h.rhs);
      if (!h.ok) r.passed = false;
      ++r.cases;
    }
  }
  r.passed = r.passed && r.worst <= r.threshold;
  return r;
}

std::vector<CheckResult> identity_checks(const RunConfig& c, Rng& rng) {
  CheckResult sol{"identities", false, 0, 0.0, 1e-4, "max residual of (a), (b) on a fresh solve"};
  CheckResult neg{"identities_power", true, 0, 0.0, 1e-1, "min residual on random fields"};
  const DiscreteProblem problem = small_problem(c, 32);
  const double eps[] = {c.epsilons.front()};
  try {
    const auto results = continuation(problem, eps, c.solver, c.center);
    const SolveResult& res = results.back();
    const IdentityResiduals ir = integral_identities(problem.with_epsilon(res.epsilon), res.u);
    sol.cases = 1;
    sol.worst = std::max(ir.res_a, ir.res_b);
    sol.passed = res.converged && !ir.empty_core && sol.worst <= sol.threshold;
    if (!res.converged) sol.note += " (solve did not converge)";
    if (ir.empty_core) sol.note += " (empty core)";
  } catch (const Error& e) {
    sol.note += std::string(" (") + e.what() + ")";
  }
  double worst = std::numeric_limits<double>::infinity();
  for (int s = 0; s < c.checks.samples; ++s) {
    const Field u = random_field(problem, rng);
    const IdentityResiduals ir = integral_identities(problem, u);
    worst = std::min(worst, std::min(ir.res_a, ir.res_b));
    ++neg.cases;
  }
  neg.worst = worst;
  neg.passed = worst >= neg.threshold;
  return {sol, neg};
}

} // namespace

std::vector<CheckResult> run_checks(const RunConfig& config, std::uint64_t seed) {
  std::vector<CheckResult> out;
  // One stream per suite, so toggling a suite leaves the others unchanged.
  auto stream = [&](std::uint64_t k) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(k)};
    return Rng(seq);
  };
  if (config.checks.gradient) {
    Rng rng = stream(1);
    out.push_back(gradient_check(config, rng));
  }
  if (config.checks.lower_bound) {
    Rng rng = stream(2);
    out.push_back(lower_bound_check(config, rng));
  }
  if (config.checks.nehari) {
    Rng rng = stream(3);
    out.push_back(nehari_check(config, rng));
  }
  if (config.checks.hardy) {
    Rng rng = stream(4);
    out.push_back(hardy_suite(config.checks.samples, rng));
  }
  if (config.checks.identities) {
    Rng rng = stream(5);
    for (auto& r : identity_checks(config, rng)) out.push_back(std::move(r));
  }
  return out;
}

std::string check_table(const std::vector<CheckResult>& results) {
  std::ostringstream os;
  char line[256];
  std::snprintf(line, sizeof line, "%-18s %-6s %6s %14s %14s  %s\n", "check", "result", "cases",
                "worst", "threshold", "measure");
  os << line;
  for (const auto& r : results) {
    std::snprintf(line, sizeof line, "%-18s %-6s %6d %14.6e %14.6e  %s\n", r.name.c_str(),
                  r.passed ? "PASS" : "FAIL", r.cases, r.worst, r.threshold, r.note.c_str());
    os << line;
  }
  return os.str();
}

} // namespace svx::cli
