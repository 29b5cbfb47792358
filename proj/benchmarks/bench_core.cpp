#include <benchmark/benchmark.h>

#include <cmath>
#include <random>

#include "sperner_fix/embedding.hpp"
#include "sperner_fix/labeling.hpp"
#include "sperner_fix/maps.hpp"
#include "sperner_fix/solver.hpp"
#include "sperner_fix/sperner.hpp"

using namespace sperner_fix;

static void BM_Subdivide(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const std::int64_t m = state.range(1);
    for (auto _ : state) benchmark::DoNotOptimize(subdivide(n, m));
}
BENCHMARK(BM_Subdivide)->Args({2, 32})->Args({2, 128})->Args({3, 16})->Args({4, 8});

static void BM_LabelGrid(benchmark::State& state) {
    auto g = subdivide(2, state.range(0));
    auto f = maps::cyclic_shift(2);
    for (auto _ : state) benchmark::DoNotOptimize(label_grid(g, f, 1e-12));
}
BENCHMARK(BM_LabelGrid)->Arg(32)->Arg(128);

static void BM_ExhaustiveSearch(benchmark::State& state) {
    auto g = subdivide(2, state.range(0));
    std::mt19937_64 rng(5);
    auto l = random_admissible_labeling(g, rng);
    for (auto _ : state) benchmark::DoNotOptimize(find_fully_labeled_exhaustive(g, l));
}
BENCHMARK(BM_ExhaustiveSearch)->Arg(32)->Arg(128);

static void BM_PathSearch(benchmark::State& state) {
    auto g = subdivide(2, state.range(0));
    std::mt19937_64 rng(5);
    auto l = random_admissible_labeling(g, rng);
    for (auto _ : state) benchmark::DoNotOptimize(find_fully_labeled_path(g, l));
}
BENCHMARK(BM_PathSearch)->Arg(32)->Arg(128);

static void BM_ImplicitWalk(benchmark::State& state) {
    const std::int64_t m = state.range(0);
    auto f = maps::cyclic_shift(2);
    VertexLabeler label = [&](const LatticePoint& p) {
        auto v = lattice_to_point(p, m);
        return sperner_label(v, f(v), 0.0);
    };
    for (auto _ : state) benchmark::DoNotOptimize(walk_to_fully_labeled(2, m, label));
}
BENCHMARK(BM_ImplicitWalk)->Arg(1000)->Arg(10000);

static void BM_Solve(benchmark::State& state) {
    auto f = maps::affine_contraction(BarycentricPoint::barycenter(2), 0.5);
    const double eps = std::pow(10.0, -static_cast<double>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(solve(f, eps));
}
BENCHMARK(BM_Solve)->Arg(2)->Arg(3)->Unit(benchmark::kMillisecond);

static void BM_BuildNet(benchmark::State& state) {
    auto d = Domain::box({0.0, 0.0}, {1.0, 1.0});
    auto fam = SeminormFamily::single(NormKind::l2);
    const double eps = 1.0 / static_cast<double>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(build_net(d, fam, eps));
}
BENCHMARK(BM_BuildNet)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);

static void BM_HInverse(benchmark::State& state) {
    auto net = build_net(Domain::box({0.0, 0.0}, {1.0, 1.0}), SeminormFamily::single(NormKind::l2), 0.25);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (auto _ : state) {
        std::vector<double> x{u(rng), u(rng)};
        benchmark::DoNotOptimize(h_inv(net, x));
    }
}
BENCHMARK(BM_HInverse);
BENCHMARK_MAIN();
