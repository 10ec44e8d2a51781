#include <benchmark/benchmark.h>

#include <cmath>

#include "ringwave/continuation.hpp"
#include "ringwave/homogeneous.hpp"
#include "ringwave/timedomain.hpp"

using namespace ringwave;

namespace {

const LatticeModel& pendulum(int n) {
    static const LatticeModel m5(5, PotentialSpec::pendulum(1.0), PotentialSpec::harmonic());
    static const LatticeModel m16(16, PotentialSpec::pendulum(1.0), PotentialSpec::harmonic());
    return n == 5 ? m5 : m16;
}

LoopState sample_loop(int n, int l0) {
    LoopState x(n, l0, 1.5);
    for (int l = 1; l <= l0; ++l)
        for (int j = 0; j < n; ++j) x.coeffs()(j, l) = {0.1 * std::pow(0.5, l) * std::cos(j + l), 0.05 * std::sin(j * l)};
    return x;
}

void BM_Residual(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0)), l0 = static_cast<int>(state.range(1));
    const HarmonicBalance hb(pendulum(n), l0);
    const LoopState x = sample_loop(n, l0);
    for (auto _ : state) benchmark::DoNotOptimize(hb.residual_packed(x));
}
BENCHMARK(BM_Residual)->Args({5, 8})->Args({5, 32})->Args({16, 32});

void BM_Jacobian(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0)), l0 = static_cast<int>(state.range(1));
    const HarmonicBalance hb(pendulum(n), l0);
    const LoopState x = sample_loop(n, l0);
    const Mat basis = Mat::Identity(x.packed_size(), x.packed_size());
    for (auto _ : state) benchmark::DoNotOptimize(hb.jacobian(x, basis));
}
BENCHMARK(BM_Jacobian)->Args({5, 8})->Args({5, 32});

void BM_SolveAtAmplitude(benchmark::State& state) {
    for (auto _ : state)
        benchmark::DoNotOptimize(solve_at_amplitude(pendulum(5), 1, BranchFamily::Standing, 0.1, 16));
}
BENCHMARK(BM_SolveAtAmplitude)->Unit(benchmark::kMillisecond);

void BM_Branch(benchmark::State& state) {
    BranchOptions opts;
    opts.max_amplitude = 0.5;
    for (auto _ : state) benchmark::DoNotOptimize(continue_branch(pendulum(5), 1, BranchFamily::Traveling, opts));
}
BENCHMARK(BM_Branch)->Unit(benchmark::kMillisecond);

void BM_Periodicity(benchmark::State& state) {
    const BranchPoint p = solve_at_amplitude(pendulum(5), 1, BranchFamily::Traveling, 0.1, 16);
    for (auto _ : state) benchmark::DoNotOptimize(verify_periodicity(pendulum(5), p.loop));
}
BENCHMARK(BM_Periodicity)->Unit(benchmark::kMillisecond);

void BM_PlanarMap(benchmark::State& state) {
    const auto seeds = polar_grid(1.0, 8, 16);
    for (auto _ : state) benchmark::DoNotOptimize(orbit_scan(seeds, state.range(0)));
    state.SetItemsProcessed(state.iterations() * static_cast<long long>(seeds.size()) * state.range(0));
}
BENCHMARK(BM_PlanarMap)->Arg(1000)->Arg(100000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
