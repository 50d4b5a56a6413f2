#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "featnet/kernels.hpp"

using namespace featnet;

namespace {

std::vector<double> random_vec(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> v(n);
    for (auto& x : v) x = normal(rng);
    return v;
}

kernels::Exec mode(const benchmark::State& s) {
    return s.range(1) ? kernels::Exec::parallel : kernels::Exec::serial;
}

// Scores of every sample against one agent's block (the deterministic baseline's inner loop).
void BM_Scores(benchmark::State& state) {
    const auto rows = static_cast<std::size_t>(state.range(0));
    const std::size_t width = 98, C = 10;
    const auto F = random_vec(rows * width, 1);
    const auto W = random_vec(width * C, 2);
    std::vector<double> out(rows * C);
    for (auto _ : state) {
        kernels::scores(F, rows, width, W, C, 8.0, out, mode(state));
        benchmark::DoNotOptimize(out.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(rows));
}

void BM_AccumulateOuter(benchmark::State& state) {
    const auto rows = static_cast<std::size_t>(state.range(0));
    const std::size_t width = 98, C = 10;
    const auto F = random_vec(rows * width, 3);
    const auto G = random_vec(rows * C, 4);
    std::vector<double> out(width * C);
    for (auto _ : state) {
        std::fill(out.begin(), out.end(), 0.0);
        kernels::accumulate_outer(F, rows, width, G, C, out, mode(state));
        benchmark::DoNotOptimize(out.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(rows));
}

// One combination over a pipeline-sized payload on a 28-agent geometric graph.
void BM_Combine(benchmark::State& state) {
    const auto width = static_cast<std::size_t>(state.range(0));
    const auto A = build_metropolis_weights(build_random_geometric_graph(28, 0.4, 1));
    const auto in = random_vec(28 * width, 5);
    std::vector<double> out(28 * width);
    for (auto _ : state) {
        kernels::combine(A, in, out, width, mode(state));
        benchmark::DoNotOptimize(out.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(width));
}

}  // namespace

BENCHMARK(BM_Scores)->ArgsProduct({{200, 2000, 20000}, {0, 1}});
BENCHMARK(BM_AccumulateOuter)->ArgsProduct({{200, 2000, 20000}, {0, 1}});
BENCHMARK(BM_Combine)->ArgsProduct({{10, 100, 2000}, {0, 1}});

BENCHMARK_MAIN();
