#pragma once

#include <memory>
#include <mutex>
#include <vector>

#include "svx/grid.hpp"
#include "svx/model.hpp"
#include "svx/operator.hpp"

namespace svx {

/// A ProblemSpec sampled on a grid: face weights, operator, b and q on nodes.
/// Copies share the epsilon-independent data.
class DiscreteProblem {
public:
  DiscreteProblem(ProblemSpec spec, GridPtr grid);

  const ProblemSpec& spec() const { return spec_; }
  const Grid& grid() const { return *shared_->grid; }
  const GridPtr& grid_ptr() const { return shared_->grid; }
  const EdgeWeights& weights() const { return shared_->weights; }
  const SparseOperator& op() const { return shared_->op; }
  /// b and q at unknowns.
  const std::vector<double>& b() const { return shared_->b; }
  const std::vector<double>& q() const { return shared_->q; }
  /// log(1/eps) q at unknowns.
  const std::vector<double>& q_eps() const { return q_eps_; }
  /// b and q on every lattice node.
  const NodalField& b_nodal() const { return shared_->b_nodal; }
  const NodalField& q_nodal() const { return shared_->q_nodal; }

  double epsilon() const { return spec_.epsilon; }
  double p() const { return spec_.p; }
  double mass() const { return shared_->grid->cell_area(); }
  double log_factor() const { return spec_.log_factor(); }

  /// Same grid and operator, new epsilon.
  DiscreteProblem with_epsilon(double eps) const;
  /// Cholesky factor of the operator, built on first use.
  const CholeskySolver& factor() const;

private:
  struct Shared {
    GridPtr grid;
    EdgeWeights weights;
    SparseOperator op;
    std::vector<double> b;
    std::vector<double> q;
    NodalField b_nodal;
    NodalField q_nodal;
    std::once_flag factor_once;
    std::unique_ptr<CholeskySolver> factor;
  };
  DiscreteProblem(ProblemSpec spec, std::shared_ptr<Shared> shared);

  ProblemSpec spec_;
  std::shared_ptr<Shared> shared_;
  std::vector<double> q_eps_;
};

struct EnergyBreakdown {
  double quadratic = 0.0;  ///< (1/2) int |grad u|^2 / b
  double nonlinear = 0.0;  ///< 1/((p+1) eps^2) int b (u - q_eps)_+^(p+1)
  double total = 0.0;
  double pairing = 0.0;    ///< <E'(u), u>
};

/// x_+^p with fast paths for p = 2, 3.
double positive_power(double x, double p);

EnergyBreakdown energy(const DiscreteProblem& problem, const Field& u);
/// Dual vector A u - m b (u - q_eps)_+^p / eps^2.
Field gradient(const DiscreteProblem& problem, const Field& u);
double nehari_h(const DiscreteProblem& problem, const Field& u, double t);

struct NehariProjection {
  double t = 1.0;
  Field projected;
};

/// Root of h along the ray t u by upward (or downward) doubling and bisection.
/// Throws NoNehariRoot when h stays positive up to t = 1e8.
NehariProjection nehari_project(const DiscreteProblem& problem, const Field& u);

/// E(u) - <E'(u),u>/(p+1) - (1/2 - 1/(p+1)) int |grad u|^2/b; nonnegative when q >= 0.
double energy_lower_bound_residual(const DiscreteProblem& problem, const Field& u);
/// Scale against which the lower-bound residual is judged.
double energy_lower_bound_scale(const DiscreteProblem& problem, const Field& u);

/// |int |grad u|^2/b - int (q^2/b) |grad(u/q)|^2| relative to the first term,
/// with q on faces taken as the endpoint average.
double change_weight_residual(const DiscreteProblem& problem, const Field& u,
                              const NodalField& q_harmonic);

struct IdentityResiduals {
  double res_a = 0.0;
  double res_b = 0.0;
  double lhs_a = 0.0;
  double rhs_a = 0.0;
  double lhs_b = 0.0;
  double rhs_b = 0.0;
  bool empty_core = false;
};

/// Both integral identities with the core gradient taken as
/// sum_e w_e d(psi_+) d(psi) over lattice edges, psi = u - q_eps.
IdentityResiduals integral_identities(const DiscreteProblem& problem, const Field& u);

struct HardyResult {
  double lhs = 0.0;
  double rhs = 0.0;
  bool ok = true;
};

/// int u^2/x1^(alpha+2) against (2/(alpha+1))^2 int |grad u|^2/x1^alpha.
HardyResult hardy_check(const GridPtr& grid, double alpha, const Field& u, double slack = 0.05);

} // namespace svx
