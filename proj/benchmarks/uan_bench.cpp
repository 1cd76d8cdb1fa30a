#include "uan/averagedness.hpp"
#include "uan/minconvex.hpp"
#include "uan/oracle.hpp"
#include "uan/sampling.hpp"
#include "uan/sets.hpp"
#include "uan/solvers.hpp"

#include <benchmark/benchmark.h>

using namespace uan;

namespace {

MinConvexFn singletons(int count) {
  std::vector<ConvexPiece> ps;
  for (int i = 0; i < count; ++i) ps.push_back(pieces::indicator(convex::singleton(make_vector({2.0 * i}))));
  return MinConvexFn(ps);
}

}  // namespace

static void BM_SparsityProjection(benchmark::State& state) {
  const Index n = state.range(0);
  const UnionMap p = project_union(sparsity_set(n, 2));
  PointSampler sampler(1);
  const Vector x = sampler.in_box(Vector::Zero(n), 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(p.evaluate(x));
  state.counters["pieces"] = static_cast<double>(p.size());
}
BENCHMARK(BM_SparsityProjection)->Arg(4)->Arg(6)->Arg(8)->Arg(10);

static void BM_ProxUnion(benchmark::State& state) {
  const UnionMap p = prox_union(singletons(static_cast<int>(state.range(0))), 1.0);
  const Vector x = make_vector({3.3});
  for (auto _ : state) benchmark::DoNotOptimize(p.evaluate(x));
}
BENCHMARK(BM_ProxUnion)->Arg(2)->Arg(8)->Arg(32);

static void BM_GridProx2D(benchmark::State& state) {
  const MinConvexFn f({pieces::quadratic(Matrix::Identity(2, 2), make_vector({0.5, -0.2})),
                       pieces::indicator(convex::ball(make_vector({1.0, 1.0}), 0.5))});
  const GridSpec grid = GridSpec::cube(2, -5, 5, static_cast<std::size_t>(state.range(0)));
  const Vector x = make_vector({0.3, 0.7});
  for (auto _ : state) benchmark::DoNotOptimize(brute_force_prox(f, 1.0, x, grid));
}
BENCHMARK(BM_GridProx2D)->Arg(101)->Arg(301)->Unit(benchmark::kMillisecond);

static void BM_CyclicProjectionsSparseAffine(benchmark::State& state) {
  const Matrix a = (Matrix(2, 4) << 1.0, 0.5, -0.3, 0.8, 0.4, -1.2, 0.7, 0.2).finished();
  const Vector b = a * make_vector({1.5, 0, 0, 0});
  const std::vector<UnionConvexSet> sets{UnionConvexSet(convex::affine_solutions(a, b)), sparsity_set(4, 1)};
  const Vector x0 = make_vector({1.505, 0.003, -0.002, 0.004});
  StopRule stop;
  stop.max_iters = 500;
  for (auto _ : state) benchmark::DoNotOptimize(cyclic_projections(sets, SelectionPolicy::lowest_index(), x0, stop));
}
BENCHMARK(BM_CyclicProjectionsSparseAffine);

static void BM_CheckAveraged(benchmark::State& state) {
  const UnionMap t = compose({project_union(sparsity_set(3, 1)), project_union(sparsity_set(3, 2))});
  AveragednessOptions opt;
  opt.pairs = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(check_averaged(t, t.alpha(), {Vector::Zero(3), 2.0}, opt));
}
BENCHMARK(BM_CheckAveraged)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
