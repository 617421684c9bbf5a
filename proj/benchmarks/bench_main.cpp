#include <benchmark/benchmark.h>

#include <random>

#include "cbci/boolean.hpp"
#include "cbci/correspondence.hpp"
#include "cbci/sector.hpp"
#include "cbci/simulate.hpp"

using namespace cbci;

namespace {

PositiveMeasure atoms(int n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> w(0.1, 10.0);
    std::vector<Atom> a;
    double loc = 0.1;
    for (int i = 0; i < n; ++i) {
        loc += 0.05 + w(rng) / n;
        a.push_back({w(rng), loc});
    }
    return PositiveMeasure::atomic(std::move(a));
}

void BM_ForwardAtomic(benchmark::State& state) {
    const ThorinPair p = make_thorin_pair(0, atoms(static_cast<int>(state.range(0)), 1));
    for (auto _ : state) benchmark::DoNotOptimize(forward(p));
}
BENCHMARK(BM_ForwardAtomic)->Arg(2)->Arg(4)->Arg(8)->Arg(16);

void BM_BackwardAtomic(benchmark::State& state) {
    const PositiveMeasure M = atoms(static_cast<int>(state.range(0)), 2);
    for (auto _ : state) benchmark::DoNotOptimize(backward(1.0, 0.5, M));
}
BENCHMARK(BM_BackwardAtomic)->Arg(2)->Arg(8);

void BM_ForwardWindow(benchmark::State& state) {
    const ThorinPair p = make_thorin_pair(0, PositiveMeasure::window(1, 2));
    InversionOptions opts;
    opts.grid_points = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(forward(p, opts));
}
BENCHMARK(BM_ForwardWindow)->Arg(101)->Arg(401)->Unit(benchmark::kMillisecond);

void BM_Psi(benchmark::State& state) {
    const Quadruplet q = make_quadruplet(0.5, 2.0 / 3.0, PositiveMeasure::atomic({{1.0 / 12.0, 1.5}}));
    for (auto _ : state) benchmark::DoNotOptimize(psi(q, 2.0, 3.0));
}
BENCHMARK(BM_Psi);

void BM_SectorReport(benchmark::State& state) {
    const auto m = PositiveMeasure::atomic({{1, 1}, {1, 2}});
    const ThorinPair p = make_thorin_pair(0, m);
    const ForwardResult f = forward(p);
    const Quadruplet q = make_quadruplet(f.a, f.b, f.M);
    for (auto _ : state) benchmark::DoNotOptimize(sector_report(q, p));
}
BENCHMARK(BM_SectorReport)->Unit(benchmark::kMillisecond);

void BM_SimulateSteps(benchmark::State& state) {
    const Quadruplet q = make_quadruplet(0.5, 2.0 / 3.0, PositiveMeasure::atomic({{1.0 / 12.0, 1.5}}));
    SimConfig cfg;
    cfg.T = 1.0;
    cfg.dt = 1e-3;
    cfg.paths = static_cast<std::size_t>(state.range(0));
    cfg.threads = 1;
    for (auto _ : state) benchmark::DoNotOptimize(simulate_path(q, 1.0, cfg));
    state.SetItemsProcessed(state.iterations() * state.range(0) * 1000);
}
BENCHMARK(BM_SimulateSteps)->Arg(64)->Arg(1024)->Unit(benchmark::kMillisecond);

void BM_BooleanConvolve(benchmark::State& state) {
    const auto m1 = PositiveMeasure::atomic({{0.25, 1}, {0.75, 3}});
    const auto m2 = PositiveMeasure::atomic({{0.5, 0.5}, {0.5, 2}});
    for (auto _ : state) benchmark::DoNotOptimize(boolean_convolve(m1, m2));
}
BENCHMARK(BM_BooleanConvolve);

}  // namespace
BENCHMARK_MAIN();
