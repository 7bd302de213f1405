#include <benchmark/benchmark.h>

#include <random>

#include "qtraj/ensemble.hpp"
#include "qtraj/lattice.hpp"
#include "qtraj/me.hpp"
#include "qtraj/rng.hpp"
#include "qtraj/sse.hpp"

using namespace qtraj;

namespace {

HermitianOperator dense_hermitian(int dim, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n;
    Matrix m(dim, dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) m(i, j) = Complex(n(rng), n(rng));
    Matrix h = 0.5 * (m + m.adjoint().eval());
    return HermitianOperator(std::move(h));
}

QuantumState uniform_state(int dim) {
    return QuantumState(Vector::Ones(dim));
}

void bench_sse_step_dense(benchmark::State& state) {
    const int dim = int(state.range(0));
    MonitoringModel model(dense_hermitian(dim, 1),
                          {{dense_hermitian(dim, 2), 0.5}});
    SseStepper stepper(model, 1e-3);
    CounterRng rng(7, 0, 0);
    Vector psi = uniform_state(dim).amplitudes();
    double dW[1], sig[1];
    long n = 0;
    for (auto _ : state) {
        dW[0] = std::sqrt(1e-3) * rng.next_normal();
        stepper.step(psi, {dW, 1}, {sig, 1}, n++);
        benchmark::DoNotOptimize(psi);
    }
}
BENCHMARK(bench_sse_step_dense)->Arg(2)->Arg(8)->Arg(16);

void bench_sse_step_csl_lattice(benchmark::State& state) {
    LatticeConfig cfg;
    cfg.n_sites = int(state.range(0));
    cfg.particle_masses = {1.0};
    cfg.smearing_sigma = 0.8;
    cfg.gamma_over_m0sq = 0.5;
    MonitoringModel model = make_csl_model(cfg);
    SseStepper stepper(model, 1e-3);
    CounterRng rng(11, 0, 0);
    Vector psi = uniform_state(cfg.n_sites).amplitudes();
    std::vector<double> dW(model.channels().size()), sig(dW.size());
    long n = 0;
    for (auto _ : state) {
        for (double& w : dW) w = std::sqrt(1e-3) * rng.next_normal();
        stepper.step(psi, dW, sig, n++);
        benchmark::DoNotOptimize(psi);
    }
}
BENCHMARK(bench_sse_step_csl_lattice)->Arg(6)->Arg(12)->Arg(16);

void bench_me_rk4(benchmark::State& state) {
    const int dim = int(state.range(0));
    MonitoringModel model(dense_hermitian(dim, 3),
                          {{dense_hermitian(dim, 4), 0.5}});
    const DensityMatrix rho0 = DensityMatrix::pure(uniform_state(dim));
    for (auto _ : state) {
        auto sol = run_me(model, rho0, 1e-3, 100, 100);
        benchmark::DoNotOptimize(sol.states.back());
    }
}
BENCHMARK(bench_me_rk4)->Arg(2)->Arg(8)->Arg(16);

void bench_ensemble_qubit(benchmark::State& state) {
    Matrix h(2, 2);
    h << 0.0, 0.5, 0.5, 0.0;
    MonitoringModel model(HermitianOperator(std::move(h)),
                          {{HermitianOperator::diagonal(
                                Eigen::Vector2d(1.0, -1.0)),
                            1.0}});
    EnsembleParams p;
    p.dt = 1e-3;
    p.steps = 200;
    p.trajectories = state.range(0);
    p.seed = 99;
    p.workers = 1;
    const auto initial = Decomposition::single(uniform_state(2));
    for (auto _ : state) {
        auto rep = run_ensemble(model, initial, p);
        benchmark::DoNotOptimize(rep.mean_states.back());
    }
    state.SetItemsProcessed(state.iterations() * p.trajectories * p.steps);
}
BENCHMARK(bench_ensemble_qubit)->Arg(64)->Arg(512);

void bench_lattice_build(benchmark::State& state) {
    LatticeConfig cfg;
    cfg.n_sites = 12;
    cfg.particle_masses = {1.0, 1.0};
    cfg.smearing_sigma = 0.8;
    cfg.gamma_over_m0sq = 0.5;
    for (auto _ : state) {
        auto family = build_mass_density_ops(cfg);
        benchmark::DoNotOptimize(family.diagonals.back());
    }
}
BENCHMARK(bench_lattice_build);

} // namespace

BENCHMARK_MAIN();
