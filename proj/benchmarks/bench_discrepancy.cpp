#include <benchmark/benchmark.h>

#include "mtask/discrepancy.hpp"
#include "mtask/tasks.hpp"

namespace {

void bm_estimate_pair(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const auto coll = mtask::generate_synthetic(2, n, 1, 1, 7);
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            mtask::estimate_discrepancy(coll.tasks[0].points, coll.tasks[1].points, 0));
    }
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(bm_estimate_pair)->Arg(100)->Arg(1000)->Arg(4000);

void bm_build_matrix(benchmark::State& state) {
    const int T = static_cast<int>(state.range(0));
    const int threads = static_cast<int>(state.range(1));
    const auto coll = mtask::generate_synthetic(T, 400, 1, 1, 3);
    for (auto _ : state) {
        benchmark::DoNotOptimize(mtask::build_matrix(coll, 3, threads));
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(T) * (T - 1) / 2);
}
BENCHMARK(bm_build_matrix)->Args({20, 1})->Args({50, 1})->Args({50, 2})->Unit(benchmark::kMillisecond);

void bm_bruteforce_oracle(benchmark::State& state) {
    const auto coll = mtask::generate_synthetic(2, 50, 1, 1, 5);
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            mtask::discrepancy_bruteforce(coll.tasks[0].points, coll.tasks[1].points, 36, 15));
    }
}
BENCHMARK(bm_bruteforce_oracle)->Unit(benchmark::kMillisecond);

} // namespace
