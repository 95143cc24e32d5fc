// Serial reference vs OpenMP kernels over growing inputs.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "thunder/environment.hpp"
#include "thunder/kernels.hpp"

using namespace thunder;
using namespace thunder::kernels;

namespace
{

std::vector<double> randomFlat(std::size_t n, std::size_t dim, std::uint64_t seed)
{
    Rng rng(seed);
    std::uniform_real_distribution<double> u(0.0, 10.0);
    std::vector<double> v(n * dim);
    for (double &x : v)
        x = u(rng);
    return v;
}

template <auto Scan>
void BM_RadiusScan(benchmark::State &state)
{
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto flat = randomFlat(n, 4, 1);
    const std::vector<double> q{5.0, 5.0, 5.0, 5.0};
    for (auto _ : state)
        benchmark::DoNotOptimize(Scan(PointSet{flat, 4}, q, 2.0));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}

template <auto Min>
void BM_MinDtw(benchmark::State &state)
{
    const auto n = static_cast<std::size_t>(state.range(0));
    std::vector<std::vector<double>> store;
    for (std::size_t i = 0; i < n; ++i)
        store.push_back(randomFlat(32, 2, 100 + i));
    std::vector<PointSet> candidates;
    for (const auto &s : store)
        candidates.push_back({s, 2});
    const auto query = randomFlat(32, 2, 7);
    for (auto _ : state)
        benchmark::DoNotOptimize(Min(candidates, PointSet{query, 2}));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}

template <auto Rank>
void BM_RankEndpoints(benchmark::State &state)
{
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto starts = randomFlat(n, 2, 3);
    const auto goals = randomFlat(n, 2, 4);
    const std::vector<double> s{1.0, 1.0}, g{9.0, 9.0};
    for (auto _ : state)
        benchmark::DoNotOptimize(Rank(PointSet{starts, 2}, PointSet{goals, 2}, s, g, 10));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}

template <auto Count>
void BM_CountInvalid(benchmark::State &state)
{
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto envs = builtinEnvironmentSet("arm4-five");
    const Environment &env = findEnvironment(envs, "arm-shelf");
    Rng rng(5);
    std::vector<Config> states;
    for (std::size_t i = 0; i < n; ++i)
        states.push_back(env.space().sampleUniform(rng));
    const StateValidator valid = env.fullValidator();
    for (auto _ : state)
        benchmark::DoNotOptimize(Count(states, valid));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}

}  // namespace

BENCHMARK(BM_RadiusScan<radiusScanSerial>)->Name("radiusScan/serial")->RangeMultiplier(8)->Range(512, 1 << 18);
BENCHMARK(BM_RadiusScan<radiusScanParallel>)->Name("radiusScan/omp")->RangeMultiplier(8)->Range(512, 1 << 18);
BENCHMARK(BM_MinDtw<minDtwSerial>)->Name("minDtw/serial")->RangeMultiplier(4)->Range(16, 4096);
BENCHMARK(BM_MinDtw<minDtwParallel>)->Name("minDtw/omp")->RangeMultiplier(4)->Range(16, 4096);
BENCHMARK(BM_RankEndpoints<rankByEndpointsSerial>)->Name("rankByEndpoints/serial")->RangeMultiplier(8)->Range(512, 1 << 18);
BENCHMARK(BM_RankEndpoints<rankByEndpointsParallel>)->Name("rankByEndpoints/omp")->RangeMultiplier(8)->Range(512, 1 << 18);
BENCHMARK(BM_CountInvalid<countInvalidSerial>)->Name("countInvalid/serial")->RangeMultiplier(8)->Range(512, 1 << 15);
BENCHMARK(BM_CountInvalid<countInvalidParallel>)->Name("countInvalid/omp")->RangeMultiplier(8)->Range(512, 1 << 15);

BENCHMARK_MAIN();
