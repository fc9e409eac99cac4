#include <benchmark/benchmark.h>

#include "mtask/rng.hpp"
#include "mtask/selection.hpp"

namespace {

mtask::discrepancy_matrix random_matrix(int T, std::uint64_t seed) {
    mtask::rng stream(seed);
    mtask::discrepancy_matrix mat;
    mat.values = Eigen::MatrixXd::Zero(T, T);
    mat.n = 1;
    for (int t = 0; t < T; ++t)
        for (int i = t + 1; i < T; ++i) {
            const double v = stream.next_double();
            mat.values(t, i) = v;
            mat.values(i, t) = v;
        }
    return mat;
}

void bm_project_simplex(benchmark::State& state) {
    const int k = static_cast<int>(state.range(0));
    mtask::rng stream(1);
    Eigen::VectorXd v(k);
    for (int i = 0; i < k; ++i) v(i) = stream.next_normal();
    for (auto _ : state) {
        benchmark::DoNotOptimize(mtask::project_row_to_simplex(v));
    }
}
BENCHMARK(bm_project_simplex)->Arg(5)->Arg(50)->Arg(500);

void bm_optimize_weights(benchmark::State& state) {
    const int T = static_cast<int>(state.range(0));
    const int k = static_cast<int>(state.range(1));
    const auto disc = random_matrix(T, 2);
    std::vector<int> I;
    for (int j = 0; j < k; ++j) I.push_back(j * (T / k));
    mtask::objective_config cfg;
    cfg.a_coeff = 0.6;
    cfg.b_coeff = 0.15;
    for (auto _ : state) {
        benchmark::DoNotOptimize(mtask::optimize_weights(disc, I, cfg));
    }
}
BENCHMARK(bm_optimize_weights)->Args({100, 5})->Args({200, 20})->Unit(benchmark::kMillisecond);

void bm_kmedoids(benchmark::State& state) {
    const int T = static_cast<int>(state.range(0));
    const auto disc = random_matrix(T, 4);
    for (auto _ : state) {
        benchmark::DoNotOptimize(mtask::select_active_kmedoids(disc, T / 10, 7));
    }
}
BENCHMARK(bm_kmedoids)->Arg(100)->Arg(200)->Unit(benchmark::kMillisecond);

void bm_grasp(benchmark::State& state) {
    const int T = static_cast<int>(state.range(0));
    const auto disc = random_matrix(T, 6);
    mtask::objective_config cfg;
    cfg.a_coeff = 0.6;
    cfg.b_coeff = 0.15;
    for (auto _ : state) {
        benchmark::DoNotOptimize(mtask::select_active_grasp(disc, T / 10, cfg, 7));
    }
}
BENCHMARK(bm_grasp)->Arg(50)->Arg(100)->Unit(benchmark::kMillisecond);

} // namespace
