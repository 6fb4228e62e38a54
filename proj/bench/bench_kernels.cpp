// Serial reference versus OpenMP kernels on the two-mode cooling model.
//
//   ./emq_bench --benchmark_filter=Rhs
// Thread count comes from OMP_NUM_THREADS.

#include "emq/kernels.hpp"
#include "emq/lindblad.hpp"
#include "emq/random.hpp"

#include <benchmark/benchmark.h>

using namespace emq;

namespace {

struct Fixture {
    Matrix h;
    std::vector<Matrix> ops;
    std::vector<double> rates;
    Matrix rho;

    explicit Fixture(Index mech_dim)
    {
        SystemParams p;
        p.g = 1.0;
        p.kappa = 20.0;
        p.gamma_m = 1e-3;
        p.n_bar = 2.0;
        const SpaceLayout layout{mode("a", 4), mode("m", mech_dim)};
        const auto model = cooling_model(p, layout);
        h = model.hamiltonian().matrix();
        ops = model.jump_matrices();
        rates = model.rates();
        Rng rng(1);
        rho = random_density(layout, rng).matrix();
    }
};

void RhsSerial(benchmark::State& state)
{
    const Fixture f(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(kernels::lindblad_rhs_serial(f.h, f.ops, f.rates, f.rho));
}

void RhsParallel(benchmark::State& state)
{
    const Fixture f(state.range(0));
    const auto plan = kernels::make_plan(f.h, f.ops, f.rates);
    Matrix out;
    for (auto _ : state) {
        kernels::lindblad_rhs_parallel(plan, f.rho, out);
        benchmark::DoNotOptimize(out.data());
    }
}

void LiouvillianSerial(benchmark::State& state)
{
    const Fixture f(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(kernels::liouvillian_serial(f.h, f.ops, f.rates));
}

void LiouvillianParallel(benchmark::State& state)
{
    const Fixture f(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(kernels::liouvillian_parallel(f.h, f.ops, f.rates));
}

}  // namespace

BENCHMARK(RhsSerial)->Arg(8)->Arg(16)->Arg(32)->Unit(benchmark::kMicrosecond);
BENCHMARK(RhsParallel)->Arg(8)->Arg(16)->Arg(32)->Unit(benchmark::kMicrosecond);
BENCHMARK(LiouvillianSerial)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);
BENCHMARK(LiouvillianParallel)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
