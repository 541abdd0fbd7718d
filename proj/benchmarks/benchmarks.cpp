#include <benchmark/benchmark.h>

#include "fixtures.hpp"
#include "scr/circuit.hpp"
#include "scr/electrons.hpp"
#include "scr/resonance.hpp"
#include "scr/verify.hpp"

using namespace scr;
using namespace scr::units;

static void BM_CircuitEigenmodes(benchmark::State& state) {
    const auto d = testing::meander_family()[0];
    for (auto _ : state) {
        benchmark::DoNotOptimize(eigenmodes(build_matrices(d, true, 0.61)));
    }
}
BENCHMARK(BM_CircuitEigenmodes);

static void BM_CoupledEigenmodes(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto pot = DotPotential::harmonic(kTwoPi * 5 * GHz);
    const auto cfg = equilibrium_positions(n, pot);
    const auto m = coupled_matrices(testing::symmetric_r1(), 0.61, pot, cfg,
                                    LeverArms::antisymmetric(n, 0.25 / um));
    for (auto _ : state) {
        benchmark::DoNotOptimize(coupled_eigenmodes(m));
    }
}
BENCHMARK(BM_CoupledEigenmodes)->Arg(1)->Arg(2)->Arg(8)->Arg(32);

static void BM_Equilibrium(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto pot = DotPotential::quadratic(-1e6, -1.5e6, 0.0);
    for (auto _ : state) {
        benchmark::DoNotOptimize(equilibrium_positions(n, pot));
    }
}
BENCHMARK(BM_Equilibrium)->Arg(3)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);

static void BM_FitResonance(benchmark::State& state) {
    const ResonanceParams p{5.025 * GHz, 3.9e5, 1e5, 0.1};
    const auto trace = synth_trace(p, 10 * p.f0 / (p.qi * p.qc / (p.qi + p.qc)),
                                   static_cast<std::size_t>(state.range(0)), 0.01, 1);
    for (auto _ : state) {
        benchmark::DoNotOptimize(fit_resonance(trace));
    }
}
BENCHMARK(BM_FitResonance)->Arg(201)->Arg(2001)->Unit(benchmark::kMillisecond);

static void BM_FitGamma(benchmark::State& state) {
    ReferenceMap refs;
    for (const auto& m : predict_family(testing::meander_family(), 0.61)) {
        refs[{m.name, ModeLabel::differential}] = m.differential.frequency;
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(fit_gamma(testing::meander_family(), refs));
    }
}
BENCHMARK(BM_FitGamma)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
