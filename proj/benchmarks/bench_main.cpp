#include <benchmark/benchmark.h>

#include <cmath>
#include <complex>
#include <vector>

#include "srlaser/dynamics.hpp"
#include "srlaser/spectrum.hpp"
#include "srlaser/units.hpp"

using namespace srlaser;

namespace {

Ensemble make_ensemble(std::size_t n) {
    Ensemble ens(Ensemble::Physics{mhz_to_angular(0.25), mhz_to_angular(50.0), 0.0});
    Rng rng(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
        AtomState a;
        a.sx = u(rng);
        a.sy = u(rng);
        a.sz = u(rng);
        a.t_exit = 1.0;
        ens.add(a);
    }
    return ens;
}

void BM_Rk4Step(benchmark::State& state) {
    auto ens = make_ensemble(static_cast<std::size_t>(state.range(0)));
    Rk4Workspace work;
    Rng rng(5);
    const double dt = 1e-12;  // keeps the state bounded over many iterations
    for (auto _ : state) {
        auto j = rk4_step(ens, sample_noise(dt, rng, true), dt, CouplingUpdate::PerStage, work);
        benchmark::DoNotOptimize(j);
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Rk4Step)->Arg(500)->Arg(2000)->Arg(10000);

void BM_TrajectoryStep(benchmark::State& state) {
    SimConfig cfg;
    cfg.kappa = mhz_to_angular(50.0);
    cfg.g = mhz_to_angular(0.25);
    cfg.tau = us_to_s(0.4);
    cfg.n_mean = static_cast<double>(state.range(0));
    cfg.pump.omega = mhz_to_angular(12.0);
    cfg.pump.tau_p = us_to_s(0.0414);
    cfg.pump.delta_pa = mhz_to_angular(2.0);
    cfg.numerics.dt = 2.5e-6 / cfg.n_mean;
    Trajectory traj(cfg);
    for (int k = 0; k < 20000; ++k) traj.step();  // fill the cavity
    for (auto _ : state) traj.step();
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_TrajectoryStep)->Arg(2000);

void BM_SpectrumFromRecord(benchmark::State& state) {
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    std::vector<std::complex<double>> field(n);
    Rng rng(7);
    std::normal_distribution<double> d;
    double phase = 0.0;
    for (auto& f : field) {
        phase += 0.01 * d(rng);
        f = std::polar(1.0, phase);
    }
    for (auto _ : state) {
        const auto corr = g1_estimate(field, 25e-9, n / 4);
        auto spec = psd(corr);
        benchmark::DoNotOptimize(spec.psd.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_SpectrumFromRecord)->Arg(1 << 14)->Arg(1 << 17);

}  // namespace

BENCHMARK_MAIN();
