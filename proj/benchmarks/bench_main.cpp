#include <benchmark/benchmark.h>

#include <cmath>

#include "kaplan/barriers.hpp"
#include "kaplan/generators.hpp"
#include "kaplan/simulator.hpp"
#include "kaplan/theta.hpp"

using namespace kaplan;

static void BM_LaplacianLattice(benchmark::State& state) {
  const auto l = lattice_ball({2, static_cast<int>(state.range(0))});
  VertexFunction f(l.graph.size());
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = std::sin(0.1 * static_cast<double>(i));
  for (auto _ : state) benchmark::DoNotOptimize(laplacian(l.graph, f));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * l.graph.size()));
}
BENCHMARK(BM_LaplacianLattice)->Arg(20)->Arg(80);

static void BM_Theta(benchmark::State& state) {
  double s = 0.05;
  for (auto _ : state) {
    benchmark::DoNotOptimize(theta(s));
    s = s < 5.0 ? s * 1.01 : 0.05;
  }
}
BENCHMARK(BM_Theta);

static void BM_EvolveTreeQuotient(benchmark::State& state) {
  const auto t = model_tree_quotient(BranchingFunction::constant(2), 25);
  const auto bar = barrier_homogeneous_tree(t, std::log(3.0));
  VertexFunction u0(t.graph.size(), 0.0);
  u0[0] = 7.0;
  EvolutionConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(evolve(t.graph, u0, Nonlinearity::power(2), cfg, &bar, 2.0));
}
BENCHMARK(BM_EvolveTreeQuotient)->Unit(benchmark::kMillisecond);

static void BM_VerifyBGLattice(benchmark::State& state) {
  const auto l = lattice_ball({static_cast<int>(state.range(0)), 10});
  const auto bar = barrier_lattice(l, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(verify_BG(l.graph, l.metric, bar, 5.0, 0.5));
}
BENCHMARK(BM_VerifyBGLattice)->Arg(1)->Arg(2)->Arg(3)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
