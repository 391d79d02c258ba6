// Serial reference against the OpenMP paths for the two hot loops: Gram matrices
// and rejection ABC.  Thread count follows OMP_NUM_THREADS / SIGABC_NUM_THREADS.
#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "sigabc/abc.hpp"
#include "sigabc/discrepancy.hpp"
#include "sigabc/models.hpp"
#include "sigabc/parallel.hpp"
#include "sigabc/sigkernel.hpp"

using namespace sigabc;

namespace {

std::vector<TimeSeries> random_streams(std::size_t count, std::size_t len) {
    Rng rng(1);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<TimeSeries> xs;
    for (std::size_t i = 0; i < count; ++i) {
        std::vector<double> v(len * 2);
        for (auto& x : v) x = u(rng);
        xs.push_back(TimeSeries::on_index_grid(std::move(v), 2));
    }
    return xs;
}

const SigKernelConfig kCfg{StaticKernelSpec::rbf(0.5), 0};

void BM_GramSerial(benchmark::State& state) {
    const auto xs = random_streams(static_cast<std::size_t>(state.range(0)), 50);
    for (auto _ : state) benchmark::DoNotOptimize(gram_matrix_serial(xs, kCfg));
}

void BM_GramParallel(benchmark::State& state) {
    const auto xs = random_streams(static_cast<std::size_t>(state.range(0)), 50);
    for (auto _ : state) benchmark::DoNotOptimize(gram_matrix(xs, kCfg));
    state.counters["threads"] = thread_count();
}

struct Ma2Problem {
    PriorSpec prior{MA2Triangle{}};
    Simulator sim = [](std::span<const double> th, Rng& r) { return simulate_ma2({th[0], th[1]}, 100, r); };
    LossFn loss;

    Ma2Problem() {
        Rng rng(0);
        const TimeSeries obs = simulate_ma2({0.6, 0.2}, 100, rng);
        loss = make_mmd_discrepancy(StaticKernelSpec::rbf(1.0)).bind(obs);
    }
};

void BM_RejectionSerial(benchmark::State& state) {
    const Ma2Problem p;
    const auto N = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(rejection_abc_serial(p.prior, p.sim, p.loss, N, N / 10, 3));
}

void BM_RejectionParallel(benchmark::State& state) {
    const Ma2Problem p;
    const auto N = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(rejection_abc(p.prior, p.sim, p.loss, N, N / 10, 3));
    state.counters["threads"] = thread_count();
}

}  // namespace

BENCHMARK(BM_GramSerial)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GramParallel)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RejectionSerial)->Arg(1000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RejectionParallel)->Arg(1000)->Unit(benchmark::kMillisecond);

int main(int argc, char** argv) {
    apply_thread_env();
    benchmark::Initialize(&argc, argv);
    if (benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
    benchmark::RunSpecifiedBenchmarks();
    benchmark::Shutdown();
    return 0;
}
