#include <benchmark/benchmark.h>

#include "qnd/experiments.hpp"
#include "qnd/sequence.hpp"
#include "qnd/spectroscopy.hpp"

using namespace qnd;

namespace {

SweepConfig sweep() {
    SweepConfig s;
    s.nominal_n_up = 3.5e5;
    return s;
}

void BM_SynthesizeSweep(benchmark::State& st) {
    auto cav = default_cavity();
    auto s = sweep();
    Rng rng = trial_rng(1, 0, "bench");
    for (auto _ : st) benchmark::DoNotOptimize(synthesize_sweep(3.5e5, 253e3, s, cav, rng));
}
BENCHMARK(BM_SynthesizeSweep);

void BM_FitSplitting(benchmark::State& st) {
    auto cav = default_cavity();
    auto s = sweep();
    s.points = static_cast<int>(st.range(0));
    Rng rng = trial_rng(1, 0, "bench");
    auto trace = synthesize_sweep(3.5e5, 253e3, s, cav, rng);
    for (auto _ : st) benchmark::DoNotOptimize(fit_splitting(trace));
}
BENCHMARK(BM_FitSplitting)->Arg(32)->Arg(64)->Arg(128);

void BM_Rotate(benchmark::State& st) {
    auto s = prepare_css(7e5, Vec3::UnitY(), 0.97);
    Rotation r{0.3, 0.1, 0.05};
    for (auto _ : st) {
        s = rotate(s, r);
        benchmark::DoNotOptimize(s.mean_dir);
    }
}
BENCHMARK(BM_Rotate);

void BM_SqueezeTrial(benchmark::State& st) {
    auto cfg = RunConfig::defaults();
    auto probe = probe_settings(cfg);
    auto seq = squeeze_sequence();
    std::uint64_t i = 0;
    for (auto _ : st) {
        Rng rng = trial_rng(1, i++, "bench");
        auto start = prepare_css(cfg.n_eff, -Vec3::UnitZ(), cfg.contrast_initial, rng);
        benchmark::DoNotOptimize(run_sequence(seq, start, RotationNoiseModel{}, probe, rng));
    }
}
BENCHMARK(BM_SqueezeTrial);

void BM_RotationNoiseTrial(benchmark::State& st) {
    auto cfg = RunConfig::defaults();
    auto seq = catalog_sequence("proj-a");
    ProbeSettings probe;
    probe.ideal_readout = true;
    probe.decoherence = probe.backaction = false;
    auto start = prepare_css(1e6, -Vec3::UnitZ(), 1.0);
    std::uint64_t i = 0;
    for (auto _ : st) {
        Rng rng = trial_rng(1, i++, "bench");
        benchmark::DoNotOptimize(run_sequence(seq, start, cfg.rotation, probe, rng));
    }
}
BENCHMARK(BM_RotationNoiseTrial);

}  // namespace
BENCHMARK_MAIN();
