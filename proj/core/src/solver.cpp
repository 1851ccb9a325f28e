#include "svx/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <deque>
#include <limits>
#include <stdexcept>

#include "svx/error.hpp"
#include "svx/vec.hpp"

namespace svx {

void validate(const SolverOptions& o) {
  auto require = [](bool ok, const char* msg) {
    if (!ok) throw std::invalid_argument(msg);
  };
  require(o.tol > 0.0, "solver tolerance must be positive");
  require(o.max_iterations >= 0, "max_iterations must be nonnegative");
  require(o.shrink > 0.0 && o.shrink < 1.0, "line-search shrink must lie in (0, 1)");
  require(o.armijo > 0.0 && o.armijo < 1.0, "Armijo constant must lie in (0, 1)");
  require(o.max_step > 0.0, "max_step must be positive");
  require(o.max_backtracks > 0, "max_backtracks must be positive");
  require(o.reproject_every >= 1, "reproject_every must be at least 1");
  require(o.memory >= 0, "memory must be nonnegative");
  require(o.cg_tol_early > 0.0 && o.cg_tol_early < 1.0, "cg_tol_early must lie in (0, 1)");
  require(o.newton_switch >= 0.0, "newton_switch must be nonnegative");
  require(o.newton_backtracks >= 0, "newton_backtracks must be nonnegative");
  require(o.minres_tol > 0.0 && o.minres_tol < 1.0, "minres_tol must lie in (0, 1)");
  require(o.minres_max_iterations > 0, "minres_max_iterations must be positive");
}

std::string to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::Converged: return "converged";
    case SolveStatus::MaxIterations: return "max-iterations";
    case SolveStatus::Stalled: return "stalled";
  }
  return "unknown";
}

namespace {

using Vec = std::vector<double>;

double hat(double s) {
  if (s <= 1.0) return 1.0;
  if (s >= 2.0) return 0.0;
  const double d = s - 1.0;
  return 1.0 - 3.0 * d * d + 2.0 * d * d * d;
}

double profile_U(double y) { return y < 1.0 ? 0.5 * (1.0 - y * y) : -std::log(y); }

// a^q - b^q for a, b >= 0, factored for the common integer exponents so that
// nearby arguments keep their relative accuracy.
double power_difference(double a, double b, double q) {
  if (q == 3.0) return (a - b) * (a * a + a * b + b * b);
  if (q == 4.0) return (a - b) * (a + b) * (a * a + b * b);
  if (q == 2.0) return (a - b) * (a + b);
  return std::pow(a, q) - std::pow(b, q);
}

double plus(double x) { return x > 0.0 ? x : 0.0; }

// Iteration state and the linear algebra shared by the descent and Newton steps.
class Workspace {
public:
  Workspace(const DiscreteProblem& problem, const SolverOptions& opts)
      : P_(problem), A_(problem.op()), opts_(opts), n_(problem.op().n),
        c_(problem.mass() / (problem.epsilon() * problem.epsilon())) {
    if (opts.lift == LinearBackend::Cholesky) P_.factor();
  }

  std::size_t size() const { return n_; }

  // m b psi_+^p / eps^2
  void nonlinear_term(const Vec& u, Vec& out) const {
    const auto& b = P_.b();
    const auto& qe = P_.q_eps();
    for (std::size_t k = 0; k < n_; ++k) out[k] = c_ * b[k] * positive_power(u[k] - qe[k], P_.p());
  }

  double energy(const Vec& u, const Vec& Au) const {
    const auto& b = P_.b();
    const auto& qe = P_.q_eps();
    const double p = P_.p();
    const double quad = 0.5 * vec::dot(u, Au);
    const double nl = vec::pairwise(n_, [&](std::size_t k) {
      return b[k] * positive_power(u[k] - qe[k], p + 1.0);
    });
    return quad - c_ * nl / (p + 1.0);
  }

  // E(v) - E(u) from differences, accurate when v is close to u.
  double energy_change(const Vec& u, const Vec& Au, const Vec& v, const Vec& Av) const {
    const auto& b = P_.b();
    const auto& qe = P_.q_eps();
    const double p = P_.p();
    const double quad =
        0.5 * vec::pairwise(n_, [&](std::size_t k) { return (v[k] - u[k]) * (Av[k] + Au[k]); });
    const double nl = vec::pairwise(n_, [&](std::size_t k) {
      const double a = plus(v[k] - qe[k]);
      const double c = plus(u[k] - qe[k]);
      if (a == 0.0 && c == 0.0) return 0.0;
      return b[k] * power_difference(a, c, p + 1.0);
    });
    return quad - c_ * nl / (p + 1.0);
  }

  // Solves A x = r with the configured backend.
  void lift(const Vec& r, Vec& x, double cg_tol) const {
    if (opts_.lift == LinearBackend::Cholesky) {
      P_.factor().solve(r, x);
      return;
    }
    std::fill(x.begin(), x.end(), 0.0);
    CgOptions co;
    co.tol = cg_tol;
    const LinearSolveReport rep = cg_solve(A_, r, x, co);
    if (!rep.converged)
      throw LinearSolveFailure("CG lift did not converge (residual " + std::to_string(rep.residual) +
                               ")");
  }

  void project(Vec& v) const {
    Field f(P_.grid_ptr(), std::move(v));
    NehariProjection np = nehari_project(P_, f);
    v = std::move(np.projected.values());
  }

  // Preconditioned MINRES for (A - D) d = rhs with preconditioner A.
  void newton_direction(const Vec& u, const Vec& rhs, Vec& x, double lift_tol) const {
    const auto& b = P_.b();
    const auto& qe = P_.q_eps();
    const double p = P_.p();
    Vec D(n_);
    for (std::size_t k = 0; k < n_; ++k) {
      const double s = u[k] - qe[k];
      D[k] = s > 0.0 ? c_ * b[k] * p * positive_power(s, p - 1.0) : 0.0;
    }
    auto apply_J = [&](const Vec& v, Vec& out) {
      A_.multiply(v, out);
      for (std::size_t k = 0; k < n_; ++k) out[k] -= D[k] * v[k];
    };
    std::fill(x.begin(), x.end(), 0.0);
    Vec r1 = rhs;
    Vec y(n_);
    lift(r1, y, lift_tol);
    const double beta1_sq = vec::dot(r1, y);
    if (!(beta1_sq > 0.0)) return;
    const double beta1 = std::sqrt(beta1_sq);
    Vec r2 = r1;
    Vec v(n_), w(n_, 0.0), w1(n_, 0.0), w2(n_, 0.0);
    double oldb = 0.0;
    double beta = beta1;
    double dbar = 0.0;
    double epsln = 0.0;
    double phibar = beta1;
    double cs = -1.0;
    double sn = 0.0;
    for (int it = 1; it <= opts_.minres_max_iterations; ++it) {
      const double s = 1.0 / beta;
      for (std::size_t k = 0; k < n_; ++k) v[k] = s * y[k];
      apply_J(v, y);
      if (it >= 2) vec::axpy(-beta / oldb, r1, y);
      const double alfa = vec::dot(v, y);
      vec::axpy(-alfa / beta, r2, y);
      r1.swap(r2);
      r2 = y;
      lift(r2, y, lift_tol);
      oldb = beta;
      const double beta_sq = vec::dot(r2, y);
      if (beta_sq < 0.0) break;  // preconditioner lost definiteness to rounding
      beta = std::sqrt(beta_sq);
      const double oldeps = epsln;
      const double delta = cs * dbar + sn * alfa;
      const double gbar = sn * dbar - cs * alfa;
      epsln = sn * beta;
      dbar = -cs * beta;
      const double gamma = std::max(std::hypot(gbar, beta), std::numeric_limits<double>::min());
      cs = gbar / gamma;
      sn = beta / gamma;
      const double phi = cs * phibar;
      phibar = sn * phibar;
      w1.swap(w2);
      w2.swap(w);
      for (std::size_t k = 0; k < n_; ++k) w[k] = (v[k] - oldeps * w1[k] - delta * w2[k]) / gamma;
      vec::axpy(phi, w, x);
      if (phibar <= opts_.minres_tol * beta1 || beta == 0.0) break;
    }
  }

private:
  const DiscreteProblem& P_;
  const SparseOperator& A_;
  const SolverOptions& opts_;
  std::size_t n_;
  double c_;
};

} // namespace

Field initial_guess(const DiscreteProblem& problem, Point center, double tau) {
  if (!(tau > 0.0)) throw std::invalid_argument("tau must be positive");
  const Grid& g = problem.grid();
  const DomainGeometry& geo = g.geometry();
  if (!geo.rect.contains(center) || geo.blocked(center))
    throw std::invalid_argument("initial-guess center must lie inside the domain");
  const double rho = 0.5 * geo.distance_to_boundary(center);
  if (rho < std::max(g.h1(), g.h2()))
    throw std::invalid_argument("initial-guess center is within one grid cell of the boundary");
  const double eps = problem.epsilon();
  const double shift = std::log(tau / eps);
  const auto& q = problem.q();
  Field v(problem.grid_ptr());
  for (std::size_t k = 0; k < v.size(); ++k) {
    const double d = distance(g.node(g.interior_node(k)), center);
    const double phi = hat(d / rho);
    v[k] = phi == 0.0 ? 0.0 : q[k] * (profile_U(d / eps) + shift) * phi;
  }
  return v;
}

double choose_tau(const DiscreteProblem& problem, Point center) {
  // v^tau = a + log(tau) c with c = q phi, so g is a function of log(tau).
  const Field a = initial_guess(problem, center, 1.0);
  const Field a2 = initial_guess(problem, center, std::exp(1.0));
  const std::size_t n = a.size();
  Vec c(n);
  for (std::size_t k = 0; k < n; ++k) c[k] = a2[k] - a[k];
  const SparseOperator& A = problem.op();
  const Vec Aa = A.multiply(a.values());
  const Vec Ac = A.multiply(c);
  const double aAa = vec::dot(a.values(), Aa);
  const double aAc = vec::dot(a.values(), Ac);
  const double cAc = vec::dot(c, Ac);
  const auto& b = problem.b();
  const auto& qe = problem.q_eps();
  const double p = problem.p();
  const double cm = problem.mass() / (problem.epsilon() * problem.epsilon());
  const double L = problem.log_factor();
  auto quad = [&](double l) { return aAa + 2.0 * l * aAc + l * l * cAc; };
  auto g = [&](double l) {
    const double s = vec::pairwise(n, [&](std::size_t k) {
      const double v = a[k] + l * c[k];
      return b[k] * positive_power(v - qe[k], p) * v;
    });
    return (quad(l) - cm * s) / L;
  };
  double lo = std::log(1e-3);
  double hi = std::log(1e3);
  double g_lo = g(lo);
  double g_hi = g(hi);
  if (!(g_lo > 0.0 && g_hi < 0.0)) return 1.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double g_mid = g(mid);
    if (std::abs(g_mid) <= 1e-8 * quad(mid) / L || hi - lo < 1e-14) return std::exp(mid);
    if (g_mid > 0.0) {
      lo = mid;
      g_lo = g_mid;
    } else {
      hi = mid;
      g_hi = g_mid;
    }
  }
  return std::exp(0.5 * (lo + hi));
}

Point default_center(const DiscreteProblem& problem) {
  const Grid& g = problem.grid();
  const DomainGeometry& geo = g.geometry();
  const double need = 2.0 * problem.epsilon();
  const auto& b = problem.b();
  const auto& q = problem.q();
  double best = std::numeric_limits<double>::infinity();
  double deepest = -1.0;
  Point deepest_point;
  std::vector<Point> tied;
  for (std::size_t k = 0; k < g.interior_count(); ++k) {
    const Point x = g.node(g.interior_node(k));
    const double d = geo.distance_to_boundary(x);
    if (d > deepest) {
      deepest = d;
      deepest_point = x;
    }
    if (d < need) continue;
    const double ratio = q[k] * q[k] / b[k];
    if (ratio < best) {
      best = ratio;
      tied.clear();
    }
    if (ratio == best) tied.push_back(x);
  }
  if (tied.empty()) return deepest_point;
  // Profiles invariant along a direction tie exactly; take the middle of the tied set.
  Point mean;
  for (const Point& x : tied) {
    mean.x1 += x.x1;
    mean.x2 += x.x2;
  }
  mean.x1 /= static_cast<double>(tied.size());
  mean.x2 /= static_cast<double>(tied.size());
  Point pick = tied.front();
  double nearest = distance(pick, mean);
  for (const Point& x : tied)
    if (distance(x, mean) < nearest) {
      nearest = distance(x, mean);
      pick = x;
    }
  return pick;
}

namespace {

// Curvature pair for the limited-memory update; hy = A^{-1} y.
struct Pair {
  Vec s;
  Vec y;
  double rho = 0.0;
  double gamma = 1.0;
};

void push_pair(std::deque<Pair>& history, const Vec& u, const Vec& u_prev, const Vec& r,
               const Vec& r_prev, const Workspace& ws, int memory) {
  const std::size_t n = u.size();
  Pair p;
  p.s.resize(n);
  p.y.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    p.s[k] = u[k] - u_prev[k];
    p.y[k] = r[k] - r_prev[k];
  }
  const double sy = vec::dot(p.s, p.y);
  if (!(sy > 0.0)) {
    history.clear();
    return;
  }
  Vec hy(n);
  ws.lift(p.y, hy, 1e-8);
  const double yhy = vec::dot(p.y, hy);
  if (!(yhy > 0.0)) return;
  p.rho = 1.0 / sy;
  p.gamma = sy / yhy;
  history.push_back(std::move(p));
  while (static_cast<int>(history.size()) > memory) history.pop_front();
}

// d = -H r, H the limited-memory inverse Hessian seeded with gamma A^{-1}.
void two_loop(const std::deque<Pair>& history, const Vec& r, Vec& d, const Workspace& ws) {
  const std::size_t n = r.size();
  Vec q = r;
  std::vector<double> alpha(history.size());
  for (std::size_t i = history.size(); i-- > 0;) {
    alpha[i] = history[i].rho * vec::dot(history[i].s, q);
    vec::axpy(-alpha[i], history[i].y, q);
  }
  ws.lift(q, d, 1e-8);
  const double gamma = history.back().gamma;
  for (double& x : d) x *= gamma;
  for (std::size_t i = 0; i < history.size(); ++i) {
    const double beta = history[i].rho * vec::dot(history[i].y, d);
    vec::axpy(alpha[i] - beta, history[i].s, d);
  }
  for (std::size_t k = 0; k < n; ++k) d[k] = -d[k];
}

} // namespace

SolveResult minimize(const DiscreteProblem& problem, const Field& u0, const SolverOptions& opts) {
  validate(opts);
  if (u0.size() != problem.grid().interior_count())
    throw std::invalid_argument("initial field does not live on the problem grid");
  const auto start = std::chrono::steady_clock::now();
  Workspace ws(problem, opts);
  const SparseOperator& A = problem.op();
  const std::size_t n = ws.size();

  SolveResult res;
  res.epsilon = problem.epsilon();
  Vec u = u0.values();
  ws.project(u);
  Vec Au = A.multiply(u);
  Vec r(n), g(n), v(n), Av(n), d(n), N(n);

  res.status = SolveStatus::MaxIterations;
  double last_step = 0.5;
  std::deque<Pair> history;
  Vec u_prev(n), r_prev(n), r_saved(n);
  bool have_prev = false;
  int it = 0;
  for (;; ++it) {
    ws.nonlinear_term(u, N);
    for (std::size_t k = 0; k < n; ++k) r[k] = Au[k] - N[k];
    const double unorm = std::sqrt(std::max(0.0, vec::dot(u, Au)));
    if (unorm < 1e-12) throw CollapsedToZero("iterate collapsed to zero");
    const double scale = std::max(1.0, unorm);
    // Probe with the tight lift tolerance only once the cheap estimate is small.
    const double probe_tol = opts.cg_tol_early;
    ws.lift(r, g, probe_tol);
    double gn2 = vec::dot(r, g);
    double rel = std::sqrt(std::max(0.0, gn2)) / scale;
    const bool near = rel < opts.newton_switch || rel < 10.0 * opts.tol;
    if (near && opts.lift == LinearBackend::ConjugateGradient) {
      ws.lift(r, g, 0.1 * opts.tol);
      gn2 = vec::dot(r, g);
      rel = std::sqrt(std::max(0.0, gn2)) / scale;
    }
    TraceEntry entry;
    entry.iteration = it;
    entry.energy = ws.energy(u, Au);
    entry.gradient_norm = rel;
    res.gradient_norm = rel;
    if (rel <= opts.tol) {
      res.trace.push_back(entry);
      res.status = SolveStatus::Converged;
      break;
    }
    if (it >= opts.max_iterations) {
      res.trace.push_back(entry);
      break;
    }
    if (have_prev) push_pair(history, u, u_prev, r, r_prev, ws, opts.memory);
    r_saved = r;
    const bool project_now = (it + 1) % opts.reproject_every == 0;
    bool accepted = false;
    if (rel < opts.newton_switch) {
      for (std::size_t k = 0; k < n; ++k) v[k] = -r[k];
      ws.newton_direction(u, v, d, 0.1 * opts.tol);
      double s = 1.0;
      for (int k = 0; k <= opts.newton_backtracks && !accepted; ++k, s *= 0.5) {
        for (std::size_t j = 0; j < n; ++j) v[j] = u[j] + s * d[j];
        ws.project(v);
        A.multiply(v, Av);
        if (ws.energy_change(u, Au, v, Av) < 0.0) {
          accepted = true;
          entry.step = s;
          entry.newton = true;
        }
      }
    }
    // Quasi-Newton direction in the A inner product, falling back to the
    // plain Sobolev gradient when it is not a descent direction or fails.
    bool quasi = !history.empty();
    if (!accepted && quasi) {
      two_loop(history, r, d, ws);
      const double slope = vec::dot(r, d);
      if (slope < 0.0) {
        double s = 1.0;
        for (int k = 0; k < opts.max_backtracks && !accepted; ++k, s *= opts.shrink) {
          for (std::size_t j = 0; j < n; ++j) v[j] = u[j] + s * d[j];
          if (project_now) ws.project(v);
          A.multiply(v, Av);
          const double dE = ws.energy_change(u, Au, v, Av);
          if (dE < 0.0 && dE <= opts.armijo * s * slope) {
            accepted = true;
            entry.step = s;
          }
        }
      }
      if (!accepted) history.clear();
    }
    if (!accepted) {
      // Start above the last accepted step so slow drifts can speed up.
      double s = std::min(opts.max_step, 2.0 * last_step);
      for (int k = 0; k < opts.max_backtracks && !accepted; ++k, s *= opts.shrink) {
        for (std::size_t j = 0; j < n; ++j) v[j] = u[j] - s * g[j];
        if (project_now) ws.project(v);
        A.multiply(v, Av);
        const double dE = ws.energy_change(u, Au, v, Av);
        if (dE < 0.0 && dE <= -opts.armijo * s * gn2) {
          accepted = true;
          entry.step = s;
          last_step = s;
        }
      }
    }
    if (accepted && opts.memory > 0) {
      for (std::size_t k = 0; k < n; ++k) {
        u_prev[k] = u[k];
        r_prev[k] = r_saved[k];
      }
      have_prev = true;
    }
    res.trace.push_back(entry);
    if (!accepted) {
      res.status = SolveStatus::Stalled;
      break;
    }
    u.swap(v);
    Au.swap(Av);
  }

  res.iterations = it;
  res.converged = res.status == SolveStatus::Converged;
  res.u = Field(problem.grid_ptr(), u);
  res.energy = energy(problem, res.u);
  const double Q = vec::dot(u, Au);
  res.nehari_residual = std::abs(nehari_h(problem, res.u, 1.0)) / Q;
  res.min_value = std::min(0.0, *std::min_element(u.begin(), u.end()));
  res.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return res;
}

std::vector<SolveResult> continuation(const DiscreteProblem& problem, std::span<const double> eps,
                                      const SolverOptions& opts, std::optional<Point> center,
                                      const SolvedCallback& on_solved) {
  if (eps.empty()) throw std::invalid_argument("epsilon list is empty");
  for (std::size_t k = 0; k < eps.size(); ++k) {
    if (!(eps[k] > 0.0 && eps[k] < 1.0)) throw std::invalid_argument("epsilon must lie in (0, 1)");
    if (k > 0 && !(eps[k] < eps[k - 1]))
      throw std::invalid_argument("epsilon list must be strictly decreasing");
  }
  std::vector<SolveResult> out;
  for (std::size_t k = 0; k < eps.size(); ++k) {
    const DiscreteProblem pk = problem.with_epsilon(eps[k]);
    Field u0;
    if (k == 0 || !opts.warm_start) {
      const Point c = center ? *center : default_center(pk);
      u0 = initial_guess(pk, c, choose_tau(pk, c));
    } else {
      u0 = out.back().u;
    }
    out.push_back(minimize(pk, u0, opts));
    if (on_solved) on_solved(pk, out.back());
    if (!out.back().converged) break;
  }
  return out;
}

} // namespace svx
