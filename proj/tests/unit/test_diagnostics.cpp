#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include <unistd.h>

#include <doctest.h>

#include "oracles.hpp"
#include "svx/diagnostics.hpp"
#include "svx/error.hpp"
#include "svx/report_io.hpp"

using namespace svx;

namespace {

constexpr double pi = std::numbers::pi;

ProblemSpec flat_lake(double eps) {
  ProblemSpec s = make_lake(ConstantDepth{1.0}, 2.0 * pi, Rect{0.0, 1.0, 0.0, 1.0});
  s.epsilon = eps;
  return s;
}

// u = q_eps + f(|x - c|) with f > 0 exactly on the open disc of radius R.
Field disc_bump(const DiscreteProblem& P, Point c, double R, double (*f)(double, double)) {
  Field u(P.grid_ptr());
  const Grid& g = P.grid();
  for (std::size_t k = 0; k < u.size(); ++k) {
    const double d = distance(g.node(g.interior_node(k)), c);
    u[k] = P.q_eps()[k] + (d < R ? f(d, R) : -0.1);
  }
  return u;
}

AsymptoticsRow synthetic_row(double eps, double diam) {
  AsymptoticsRow r;
  r.epsilon = eps;
  r.diameter = diam;
  r.diam_over_eps = diam / eps;
  return r;
}

struct RingSolve {
  DiscreteProblem problem;
  SolveResult result;
};

const RingSolve& ring_solve() {
  static const RingSolve r = [] {
    const ProblemSpec s = make_whole_space_ring(1.0, 4.0 * pi).with_epsilon(0.1);
    const DiscreteProblem P(s, Grid::create(s.geometry, 64, 128));
    const double eps[] = {0.1};
    auto res = continuation(P, eps);
    return RingSolve{P, std::move(res.back())};
  }();
  return r;
}

} // namespace

TEST_SUITE("diagnostics") {

TEST_CASE("extract_core: empty core") {
  const ProblemSpec s = flat_lake(0.1);
  const DiscreteProblem P(s, Grid::create(s.geometry, 16, 16));
  CHECK_THROWS_AS(extract_core(P, Field(P.grid_ptr())), EmptyCore);
  CHECK(circulation(P, Field(P.grid_ptr())) == 0.0);
}

TEST_CASE("extract_core: synthetic disc") {
  const ProblemSpec s = flat_lake(0.1);
  const DiscreteProblem P(s, Grid::create(s.geometry, 64, 64));
  const double R = 0.2;
  const Field u = disc_bump(P, {0.5, 0.5}, R, [](double d, double r) { return 1.0 - d / r; });
  const CoreStats c = extract_core(P, u);
  CHECK(c.components == 1);
  CHECK(std::abs(c.diameter - 2.0 * R) <= P.grid().h1());
  CHECK(c.centroid.x1 == doctest::Approx(0.5));
  CHECK(c.centroid.x2 == doctest::Approx(0.5));
  CHECK(c.peak.x1 == 0.5);
}

TEST_CASE("extract_core: two separated discs") {
  const ProblemSpec s = flat_lake(0.1);
  const DiscreteProblem P(s, Grid::create(s.geometry, 32, 32));
  Field u(P.grid_ptr());
  const Grid& g = P.grid();
  for (std::size_t k = 0; k < u.size(); ++k) {
    const Point x = g.node(g.interior_node(k));
    const bool in = distance(x, {0.25, 0.5}) < 0.1 || distance(x, {0.75, 0.5}) < 0.1;
    u[k] = P.q_eps()[k] + (in ? 1.0 : -1.0);
  }
  CHECK(extract_core(P, u).components == 2);
}

TEST_CASE("circulation: closed-form bump integral") {
  ProblemSpec s = flat_lake(0.1);
  s.p = 2.0;
  std::vector<double> err;
  for (int n : {64, 128}) {
    const DiscreteProblem P(s, Grid::create(s.geometry, n, n));
    const double R = 0.25;
    // (u - q_eps)_+^2 = 1 - d^2/R^2, whose integral is pi R^2 / 2.
    const Field u = disc_bump(P, {0.5, 0.5}, R, [](double d, double r) { return std::sqrt(1.0 - d * d / (r * r)); });
    const double exact = pi * R * R / 2.0 / (0.1 * 0.1);
    err.push_back(std::abs(circulation(P, u) - exact) / exact);
  }
  CHECK(err[0] <= 1e-2);
  CHECK(err[1] <= err[0]);
}

TEST_CASE("energy_report: pointwise bound on the limit density") {
  const ProblemSpec s = make_lake(GaussianBump{1.0, 1.0, {0.35, 0.5}, 1.0}, 2.0 * pi, Rect{0.0, 1.0, 0.0, 1.0});
  const DiscreteProblem P(s.with_epsilon(0.5), Grid::create(s.geometry, 24, 24));
  const double eps[] = {0.5, 0.2};
  const TargetPrediction t = predicted_target(s, P.grid());
  for (const auto& r : continuation(P, eps)) {
    const AsymptoticsRow row = energy_report(P.with_epsilon(r.epsilon), r, t);
    CHECK(row.q2b_at_peak - t.limit_energy_density >= 0.0);
    CHECK(row.converged);
    CHECK(row.upper_bound_ratio > 0.0);
    CHECK(row.kappa > 0.0);
  }
}

TEST_CASE("diameter_scaling: exact linear data and precondition") {
  std::vector<AsymptoticsRow> rows;
  for (double e : {0.2, 0.1, 0.05, 0.025}) rows.push_back(synthetic_row(e, 3.0 * e));
  const DiameterScaling d = diameter_scaling(rows);
  CHECK(d.slope == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(d.min_ratio == doctest::Approx(3.0));
  CHECK(d.max_ratio == doctest::Approx(3.0));
  rows.resize(2);
  CHECK_THROWS_AS(diameter_scaling(rows), std::invalid_argument);
}

TEST_CASE("strictly_decreasing") {
  const std::vector<double> a = {3.0, 2.0, 1.0};
  const std::vector<double> b = {3.0, 3.0, 1.0};
  CHECK(strictly_decreasing(a));
  CHECK_FALSE(strictly_decreasing(b));
  CHECK(strictly_decreasing(std::span<const double>()));
}

TEST_CASE("ring: connected core and Euler flow") {
  const RingSolve& rs = ring_solve();
  const DiscreteProblem& P = rs.problem;
  const SolveResult& r = rs.result;
  REQUIRE(r.converged);
  const CoreStats core = extract_core(P, r.u);
  CHECK(core.components == 1);

  const FlowFields f = reconstruct_euler_flow(P, r.u);
  const Grid& g = P.grid();
  for (std::size_t n = 0; n < g.node_count(); ++n)
    if (f.psi[n] <= 0.0) CHECK(f.vorticity[n] == 0.0);
  double vmax = 0.0;
  for (double v : f.v1) vmax = std::max(vmax, std::abs(v));
  CHECK(max_cell_divergence(P, f) <= 1e-12 * vmax * g.h1() * g.n1());

  // Loop two cells outside the core bounding box.
  int i0 = g.n1();
  int i1 = 0;
  int j0 = g.n2();
  int j1 = 0;
  for (std::size_t n : core.nodes) {
    i0 = std::min(i0, g.i_of(n));
    i1 = std::max(i1, g.i_of(n));
    j0 = std::min(j0, g.j_of(n));
    j1 = std::max(j1, g.j_of(n));
  }
  const double kappa = circulation(P, r.u);
  const double loop = loop_circulation(P, f, i0 - 2, i1 + 2, j0 - 2, j1 + 2);
  CHECK(std::abs(loop - kappa) <= 0.05 * kappa);
  CHECK_THROWS_AS(reconstruct_lake_flow(P, r.u), std::invalid_argument);
}

TEST_CASE("lake flow: divergence, planar reduction, vorticity integral") {
  const ProblemSpec s = flat_lake(0.2);
  const DiscreteProblem P(s, Grid::create(s.geometry, 32, 32));
  const double eps[] = {0.2};
  const SolveResult r = continuation(P, eps).back();
  const FlowFields f = reconstruct_lake_flow(P, r.u);
  const Grid& g = P.grid();
  double vmax = 0.0;
  for (double v : f.v1) vmax = std::max(vmax, std::abs(v));
  CHECK(max_cell_divergence(P, f) <= 1e-12 * vmax);

  // b = 1: v = (d2 psi, -d1 psi).
  for (int i = 0; i <= g.n1(); ++i)
    for (int j = 0; j < g.n2(); ++j) {
      const double d = (f.psi[g.node_index(i, j + 1)] - f.psi[g.node_index(i, j)]) / g.h2();
      CHECK(f.v1[static_cast<std::size_t>(i) * g.n2() + j] == doctest::Approx(d).epsilon(1e-15));
    }
  const double kappa = circulation(P, r.u);
  CHECK(std::abs(vorticity_integral(P, f) - kappa) <= 1e-12 * kappa);
  CHECK_THROWS_AS(reconstruct_euler_flow(P, r.u), std::invalid_argument);
}

TEST_CASE("strict inequality: identical problems give no gap") {
  const ProblemSpec s = make_outside_ball_ring(1.0, 4.0 * pi);
  const DiscreteProblem P(s, Grid::create(s.geometry, 32, 64));
  const double eps[] = {0.2};
  const auto gaps = strict_inequality_check(P, P, eps);
  REQUIRE(gaps.size() == 1);
  CHECK(std::abs(gaps[0].gap) <= 1e-8 * std::abs(gaps[0].c_exterior));
}

TEST_CASE("report: JSON round trip, CSV and number format") {
  std::vector<AsymptoticsRow> rows;
  for (double e : {0.2, 0.1, 0.05}) {
    AsymptoticsRow r = synthetic_row(e, 2.0 * e + e * e);
    r.energy = 1.0 / e + 0.1;
    r.kappa_gap = e;
    r.b_gap = e / 3.0;
    r.energy_ratio = 1.0 + e;
    r.upper_bound_ratio = 1.0 + e;
    r.centroid = {0.1 + e, -e};
    r.components = 1;
    r.converged = true;
    rows.push_back(r);
  }
  TargetPrediction t;
  t.point = {0.35, 0.5};
  t.limit_energy_density = 0.5;
  t.sup_b = 2.0;
  const AsymptoticsReport rep = build_report("lake", t, rows);
  CHECK(rep.scaling.has_value());
  CHECK(rep.kappa_gap_decreasing);
  const std::string json = report_to_json(rep);
  const AsymptoticsReport back = report_from_json(json);
  CHECK(report_to_json(back) == json);
  CHECK(comparison_table(back) == comparison_table(rep));
  CHECK(back.rows[1].energy == rep.rows[1].energy);

  const std::string csv = report_to_csv(rep);
  CHECK(csv.substr(0, csv.find('\n')).find("epsilon") != std::string::npos);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);

  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(format_double(1.0 / 3.0) == "0.33333333333333331");
  CHECK_THROWS_AS(report_from_json("{}"), Error);
  CHECK_THROWS_AS(report_from_json("not json"), Error);
}

TEST_CASE("report: two rows leave the slope undetermined") {
  std::vector<AsymptoticsRow> rows = {synthetic_row(0.2, 0.4), synthetic_row(0.1, 0.2)};
  const AsymptoticsReport rep = build_report("lake", TargetPrediction{}, rows);
  CHECK_FALSE(rep.scaling.has_value());
  CHECK(comparison_table(rep).find("insufficient points") != std::string::npos);
}

TEST_CASE("solution CSV and trace lines") {
  const ProblemSpec s = flat_lake(0.5);
  const DiscreteProblem P(s, Grid::create(s.geometry, 8, 8));
  const double eps[] = {0.5};
  const SolveResult r = continuation(P, eps).back();
  const std::string csv = solution_to_csv(P, r.u);
  CHECK(csv.substr(0, csv.find('\n')) == "x1,x2,u,psi,vorticity");
  CHECK(static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n')) == P.grid().node_count() + 1);
  const std::string trace = trace_to_jsonl(r.trace);
  CHECK(static_cast<std::size_t>(std::count(trace.begin(), trace.end(), '\n')) == r.trace.size());
}

TEST_CASE("atomic writes") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / ("svx-unit-" + std::to_string(::getpid()));
  fs::create_directories(dir);
  write_file_atomic(dir / "a.txt", "first");
  write_file_atomic(dir / "a.txt", "second");
  std::ifstream in(dir / "a.txt");
  std::string text;
  std::getline(in, text);
  CHECK(text == "second");
  std::size_t entries = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir)) ++entries;
  CHECK(entries == 1);
  CHECK_THROWS_AS(write_file_atomic(dir / "missing" / "b.txt", "x"), Error);
  fs::remove_all(dir);
}

} // TEST_SUITE
