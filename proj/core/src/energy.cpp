#include "svx/energy.hpp"

#include <cmath>
#include <mutex>
#include <stdexcept>

#include "svx/error.hpp"
#include "svx/vec.hpp"

namespace svx {


DiscreteProblem::DiscreteProblem(ProblemSpec spec, GridPtr grid) : spec_(std::move(spec)) {
  spec_.validate();
  const Rect& a = spec_.geometry.rect;
  const Rect& g = grid->geometry().rect;
  if (a.x1_min != g.x1_min || a.x1_max != g.x1_max || a.x2_min != g.x2_min || a.x2_max != g.x2_max)
    throw std::invalid_argument("grid rectangle differs from the problem geometry");
  auto s = std::make_shared<Shared>();
  s->grid = std::move(grid);
  s->weights = edge_weights(*s->grid, spec_.weight);
  s->op = assemble(*s->grid, s->weights);
  s->b_nodal = sample_profile(s->grid, spec_.weight);
  s->q_nodal = sample_profile(s->grid, spec_.profile);
  const Grid& gr = *s->grid;
  s->b.resize(gr.interior_count());
  s->q.resize(gr.interior_count());
  for (std::size_t k = 0; k < gr.interior_count(); ++k) {
    const std::size_t node = gr.interior_node(k);
    s->b[k] = s->b_nodal[node];
    s->q[k] = s->q_nodal[node];
    if (!(s->b[k] > 0.0)) throw std::invalid_argument("weight b must be positive at interior nodes");
    if (!(s->q[k] > 0.0)) throw std::invalid_argument("profile q must be positive at interior nodes");
  }
  shared_ = std::move(s);
  const double L = log_factor();
  q_eps_.resize(shared_->q.size());
  for (std::size_t k = 0; k < q_eps_.size(); ++k) q_eps_[k] = L * shared_->q[k];
}

DiscreteProblem::DiscreteProblem(ProblemSpec spec, std::shared_ptr<Shared> shared)
    : spec_(std::move(spec)), shared_(std::move(shared)) {
  const double L = log_factor();
  q_eps_.resize(shared_->q.size());
  for (std::size_t k = 0; k < q_eps_.size(); ++k) q_eps_[k] = L * shared_->q[k];
}

DiscreteProblem DiscreteProblem::with_epsilon(double eps) const {
  return DiscreteProblem(spec_.with_epsilon(eps), shared_);
}

const CholeskySolver& DiscreteProblem::factor() const {
  std::call_once(shared_->factor_once,
                 [&] { shared_->factor = std::make_unique<CholeskySolver>(shared_->op); });
  return *shared_->factor;
}

double positive_power(double x, double p) {
  if (x <= 0.0) return 0.0;
  if (p == 2.0) return x * x;
  if (p == 3.0) return x * x * x;
  if (p == 1.0) return x;
  return std::pow(x, p);
}

namespace {

void check_size(const DiscreteProblem& problem, const Field& u) {
  if (u.size() != problem.grid().interior_count())
    throw std::invalid_argument("field does not live on the problem grid");
}

void check_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw Error(std::string("non-finite ") + what);
}

} // namespace

EnergyBreakdown energy(const DiscreteProblem& problem, const Field& u) {
  check_size(problem, u);
  const auto& b = problem.b();
  const auto& qe = problem.q_eps();
  const double p = problem.p();
  const double eps2 = problem.epsilon() * problem.epsilon();
  const double m = problem.mass();
  EnergyBreakdown e;
  e.quadratic = 0.5 * dirichlet_energy(u, problem.weights());
  const double s_high = vec::pairwise(u.size(), [&](std::size_t k) {
    return b[k] * positive_power(u[k] - qe[k], p + 1.0);
  });
  const double s_pair = vec::pairwise(u.size(), [&](std::size_t k) {
    return b[k] * positive_power(u[k] - qe[k], p) * u[k];
  });
  e.nonlinear = m * s_high / ((p + 1.0) * eps2);
  e.total = e.quadratic - e.nonlinear;
  e.pairing = 2.0 * e.quadratic - m * s_pair / eps2;
  check_finite(e.total, "energy");
  check_finite(e.pairing, "pairing");
  return e;
}

Field gradient(const DiscreteProblem& problem, const Field& u) {
  check_size(problem, u);
  Field g(u.grid_ptr());
  problem.op().multiply(u.values(), g.values());
  const auto& b = problem.b();
  const auto& qe = problem.q_eps();
  const double c = problem.mass() / (problem.epsilon() * problem.epsilon());
  for (std::size_t k = 0; k < u.size(); ++k)
    g[k] -= c * b[k] * positive_power(u[k] - qe[k], problem.p());
  return g;
}

namespace {

// h(t) = t^2 Q - (m/eps^2) sum b (t u - q_eps)_+^p t u with Q = u^T A u.
double ray_h(const DiscreteProblem& problem, const Field& u, double Q, double t) {
  const auto& b = problem.b();
  const auto& qe = problem.q_eps();
  const double p = problem.p();
  const double s = vec::pairwise(u.size(), [&](std::size_t k) {
    const double tu = t * u[k];
    return b[k] * positive_power(tu - qe[k], p) * tu;
  });
  return t * t * Q - problem.mass() * s / (problem.epsilon() * problem.epsilon());
}

} // namespace

double nehari_h(const DiscreteProblem& problem, const Field& u, double t) {
  check_size(problem, u);
  return ray_h(problem, u, dirichlet_energy(u, problem.weights()), t);
}

NehariProjection nehari_project(const DiscreteProblem& problem, const Field& u) {
  check_size(problem, u);
  constexpr double t_max = 1e8;
  const double Q = problem.op().quadratic_form(u.values());
  if (!(Q > 0.0)) throw NoNehariRoot("Nehari projection of the zero field");
  auto h = [&](double t) { return ray_h(problem, u, Q, t); };
  const double h1 = h(1.0);
  NehariProjection out;
  if (std::abs(h1) <= 1e-12 * Q) {
    out.t = 1.0;
    out.projected = u;
    return out;
  }
  double lo;
  double hi;
  double h_lo;
  double h_hi;
  if (h1 > 0.0) {
    lo = 1.0;
    h_lo = h1;
    hi = 2.0;
    h_hi = h(hi);
    while (h_hi > 0.0) {
      lo = hi;
      h_lo = h_hi;
      hi *= 2.0;
      if (hi > t_max) throw NoNehariRoot("h(t) > 0 up to t = 1e8; the ray never meets the manifold");
      h_hi = h(hi);
    }
  } else {
    hi = 1.0;
    h_hi = h1;
    lo = 0.5;
    h_lo = h(lo);
    while (h_lo <= 0.0) {
      hi = lo;
      h_hi = h_lo;
      lo *= 0.5;
      if (lo < 1e-12) throw NoNehariRoot("h(t) <= 0 down to t = 1e-12");
      h_lo = h(lo);
    }
  }
  // Bisection past the 1e-12 relative width down to adjacent doubles, so the
  // projected field meets the manifold to rounding.
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double h_mid = h(mid);
    if (h_mid > 0.0) {
      lo = mid;
      h_lo = h_mid;
    } else {
      hi = mid;
      h_hi = h_mid;
    }
  }
  out.t = std::abs(h_lo) <= std::abs(h_hi) ? lo : hi;
  out.projected = Field(u.grid_ptr(), u.values());
  for (double& v : out.projected.values()) v *= out.t;
  return out;
}

double energy_lower_bound_residual(const DiscreteProblem& problem, const Field& u) {
  const EnergyBreakdown e = energy(problem, u);
  const double p = problem.p();
  const double norm2 = 2.0 * e.quadratic;
  return e.total - e.pairing / (p + 1.0) - (0.5 - 1.0 / (p + 1.0)) * norm2;
}

double energy_lower_bound_scale(const DiscreteProblem& problem, const Field& u) {
  const EnergyBreakdown e = energy(problem, u);
  return std::abs(e.total) + std::abs(e.pairing) + 2.0 * e.quadratic + e.nonlinear;
}

double change_weight_residual(const DiscreteProblem& problem, const Field& u,
                              const NodalField& q_harmonic) {
  check_size(problem, u);
  const Grid& g = problem.grid();
  if (q_harmonic.size() != g.node_count())
    throw std::invalid_argument("harmonic profile must cover every lattice node");
  const NodalField full = expand(u);
  std::vector<double> ratio(g.node_count(), 0.0);
  std::vector<double> lhs_terms;
  std::vector<double> rhs_terms;
  for_each_edge(g, problem.weights(), [&](std::size_t a, std::size_t c, double) {
    if (!(q_harmonic[a] > 0.0) || !(q_harmonic[c] > 0.0))
      throw std::invalid_argument("change of weight needs q > 0 on every active node");
  });
  for (std::size_t k = 0; k < g.node_count(); ++k)
    if (q_harmonic[k] > 0.0) ratio[k] = full[k] / q_harmonic[k];
  for_each_edge(g, problem.weights(), [&](std::size_t a, std::size_t c, double we) {
    const double du = full[c] - full[a];
    const double qm = 0.5 * (q_harmonic[a] + q_harmonic[c]);
    const double dr = ratio[c] - ratio[a];
    lhs_terms.push_back(we * du * du);
    rhs_terms.push_back(we * qm * qm * dr * dr);
  });
  const double lhs = vec::sum(lhs_terms);
  const double rhs = vec::sum(rhs_terms);
  if (lhs == 0.0) return std::abs(rhs);
  return std::abs(lhs - rhs) / lhs;
}

IdentityResiduals integral_identities(const DiscreteProblem& problem, const Field& u) {
  check_size(problem, u);
  const Grid& g = problem.grid();
  const double L = problem.log_factor();
  const double p = problem.p();
  const double eps2 = problem.epsilon() * problem.epsilon();
  const double m = problem.mass();
  const auto& b = problem.b();
  const auto& qe = problem.q_eps();
  const NodalField full = expand(u);
  const NodalField& qn = problem.q_nodal();

  std::vector<double> psi(g.node_count());
  std::vector<double> psi_plus(g.node_count(), 0.0);
  bool any = false;
  for (std::size_t k = 0; k < g.node_count(); ++k) {
    psi[k] = full[k] - L * qn[k];
    if (g.is_interior(k) && psi[k] > 0.0) {
      psi_plus[k] = psi[k];
      any = true;
    }
  }
  std::vector<double> core_terms;
  for_each_edge(g, problem.weights(), [&](std::size_t a, std::size_t c, double we) {
    const double dp = psi_plus[c] - psi_plus[a];
    if (dp != 0.0) core_terms.push_back(we * dp * (psi[c] - psi[a]));
  });
  const double core_grad = vec::sum(core_terms);

  IdentityResiduals r;
  r.empty_core = !any;
  r.lhs_b = m * vec::pairwise(u.size(), [&](std::size_t k) {
              return b[k] * positive_power(u[k] - qe[k], p + 1.0);
            }) / eps2;
  r.rhs_b = core_grad;
  r.lhs_a = m * vec::pairwise(u.size(), [&](std::size_t k) {
              return b[k] * positive_power(u[k] - qe[k], p) * qe[k];
            }) / eps2;
  r.rhs_a = dirichlet_energy(u, problem.weights()) - core_grad;
  auto rel = [](double x, double y) {
    const double s = std::max(std::abs(x), std::abs(y));
    return s > 0.0 ? std::abs(x - y) / s : 0.0;
  };
  r.res_a = rel(r.lhs_a, r.rhs_a);
  r.res_b = r.empty_core ? 0.0 : rel(r.lhs_b, r.rhs_b);
  return r;
}

HardyResult hardy_check(const GridPtr& grid, double alpha, const Field& u, double slack) {
  if (alpha < 0.0) throw std::invalid_argument("Hardy exponent must be nonnegative");
  const Grid& g = *grid;
  if (u.size() != g.interior_count()) throw std::invalid_argument("field does not live on the grid");
  HardyResult r;
  r.lhs = g.cell_area() * vec::pairwise(u.size(), [&](std::size_t k) {
            const double x1 = g.node(g.interior_node(k)).x1;
            return u[k] * u[k] / std::pow(x1, alpha + 2.0);
          });
  const double c = 2.0 / (alpha + 1.0);
  r.rhs = c * c * dirichlet_energy(u, WeightProfile(PowerWeight{alpha}));
  r.ok = r.lhs <= r.rhs * (1.0 + slack);
  return r;
}

} // namespace svx
