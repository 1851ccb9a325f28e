#include <numbers>
#include <random>

#include <benchmark/benchmark.h>

#include "svx/solver.hpp"

namespace {

using namespace svx;

ProblemSpec ring(double eps) { return make_whole_space_ring(1.0, 4.0 * std::numbers::pi).with_epsilon(eps); }

GridPtr ring_grid(int n) { return Grid::create(ring(0.1).geometry, n, 2 * n); }

Field noisy(const DiscreteProblem& P, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  Field f(P.grid_ptr());
  for (std::size_t k = 0; k < f.size(); ++k) f[k] = P.q_eps()[k] * u(rng);
  return f;
}

void BM_Assemble(benchmark::State& state) {
  const GridPtr g = ring_grid(static_cast<int>(state.range(0)));
  const WeightProfile b = PowerWeight{1.0};
  for (auto _ : state) benchmark::DoNotOptimize(assemble(*g, b));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(g->interior_count()));
}
BENCHMARK(BM_Assemble)->Arg(64)->Arg(256);

void BM_Matvec(benchmark::State& state) {
  const GridPtr g = ring_grid(static_cast<int>(state.range(0)));
  const SparseOperator A = assemble(*g, WeightProfile(PowerWeight{1.0}));
  std::vector<double> x(A.n, 1.0);
  std::vector<double> y(A.n);
  for (auto _ : state) {
    A.multiply(x, y);
    benchmark::DoNotOptimize(y.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(A.nonzeros()));
}
BENCHMARK(BM_Matvec)->Arg(64)->Arg(256)->Arg(512);

void BM_ConjugateGradient(benchmark::State& state) {
  const GridPtr g = ring_grid(static_cast<int>(state.range(0)));
  const SparseOperator A = assemble(*g, WeightProfile(PowerWeight{1.0}));
  const std::vector<double> rhs(A.n, 1.0);
  std::vector<double> x(A.n);
  for (auto _ : state) {
    std::fill(x.begin(), x.end(), 0.0);
    benchmark::DoNotOptimize(cg_solve(A, rhs, x));
  }
}
BENCHMARK(BM_ConjugateGradient)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_CholeskyFactor(benchmark::State& state) {
  const GridPtr g = ring_grid(static_cast<int>(state.range(0)));
  const SparseOperator A = assemble(*g, WeightProfile(PowerWeight{1.0}));
  for (auto _ : state) {
    CholeskySolver chol(A);
    benchmark::DoNotOptimize(&chol);
  }
}
BENCHMARK(BM_CholeskyFactor)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_CholeskySolve(benchmark::State& state) {
  const GridPtr g = ring_grid(static_cast<int>(state.range(0)));
  const SparseOperator A = assemble(*g, WeightProfile(PowerWeight{1.0}));
  const CholeskySolver chol(A);
  const std::vector<double> rhs(A.n, 1.0);
  std::vector<double> x(A.n);
  for (auto _ : state) {
    chol.solve(rhs, x);
    benchmark::DoNotOptimize(x.data());
  }
}
BENCHMARK(BM_CholeskySolve)->Arg(64)->Arg(256)->Unit(benchmark::kMicrosecond);

void BM_EnergyAndGradient(benchmark::State& state) {
  const DiscreteProblem P(ring(0.05), ring_grid(static_cast<int>(state.range(0))));
  const Field u = noisy(P, 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(energy(P, u));
    benchmark::DoNotOptimize(gradient(P, u));
  }
}
BENCHMARK(BM_EnergyAndGradient)->Arg(64)->Arg(256);

void BM_NehariProject(benchmark::State& state) {
  const DiscreteProblem P(ring(0.05), ring_grid(static_cast<int>(state.range(0))));
  const Field u = noisy(P, 2);
  for (auto _ : state) benchmark::DoNotOptimize(nehari_project(P, u));
}
BENCHMARK(BM_NehariProject)->Arg(64)->Arg(256);

void BM_Minimize(benchmark::State& state) {
  const DiscreteProblem P(ring(0.1), ring_grid(static_cast<int>(state.range(0))));
  const Point c{1.0, 0.0};
  const Field u0 = initial_guess(P, c, choose_tau(P, c));
  for (auto _ : state) benchmark::DoNotOptimize(minimize(P, u0));
}
BENCHMARK(BM_Minimize)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
