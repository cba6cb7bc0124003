// Serial reference kernels against their OpenMP counterparts.

#include <benchmark/benchmark.h>

#include <random>

#include "psm/afriat.hpp"
#include "psm/indices.hpp"
#include "psm/quadratic.hpp"
#include "psm/session.hpp"

using namespace psm;

namespace {

const AnswerSpace kSpace({10, 10});
const QuadraticParams kAgent = QuadraticParams::from_ratio(1.7, 3.4, 6.2);

std::vector<Round> design() {
    SessionConfig config;
    config.rounds_per_corner = 4;
    config.shuffle_seed = 5;
    std::vector<Round> rounds;
    for (const auto& g : generate_rounds(config, ideal_grid_answer(kAgent, kSpace)))
        if (!g.excluded) rounds.push_back(g.round);
    return rounds;
}

/// Noiseless agent on a 30 x 30 grid so the utility has a real number of points.
const PiecewiseUtility& utility() {
    static const PiecewiseUtility u = [] {
        const AnswerSpace space({30, 30});
        SessionConfig config;
        config.space = space;
        config.rounds_per_corner = 4;
        const auto agent = QuadraticParams::from_ratio(0.6, 11.0, 19.0);
        std::vector<Round> rounds;
        for (const auto& g : generate_rounds(config, ideal_grid_answer(agent, space)))
            if (!g.excluded) rounds.push_back(g.round);
        const Dataset d = simulate_agent(agent, space, rounds, 0.0, 1);
        return PiecewiseUtility(d, solve_afriat(d));
    }();
    return u;
}

void BM_BronarsSerial(benchmark::State& state) {
    const auto rounds = design();
    for (auto _ : state) benchmark::DoNotOptimize(serial::bronars_power(rounds, kSpace, state.range(0), 1));
}
void BM_BronarsParallel(benchmark::State& state) {
    const auto rounds = design();
    for (auto _ : state) benchmark::DoNotOptimize(bronars_power(rounds, kSpace, state.range(0), 1));
}
BENCHMARK(BM_BronarsSerial)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BronarsParallel)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_GridValuesSerial(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(serial::grid_values(utility()));
}
void BM_GridValuesParallel(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(utility().grid_values());
}
BENCHMARK(BM_GridValuesSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GridValuesParallel)->Unit(benchmark::kMillisecond);

void BM_FindPeakSerial(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(serial::find_peak(utility()));
}
void BM_FindPeakParallel(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(find_peak(utility()));
}
BENCHMARK(BM_FindPeakSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FindPeakParallel)->Unit(benchmark::kMillisecond);

void BM_FitSerial(benchmark::State& state) {
    const auto data = simulate_agent_continuous(kAgent, kSpace, design(), 0.3, 2);
    for (auto _ : state) benchmark::DoNotOptimize(serial::fit(data, kSpace));
}
void BM_FitParallel(benchmark::State& state) {
    const auto data = simulate_agent_continuous(kAgent, kSpace, design(), 0.3, 2);
    for (auto _ : state) benchmark::DoNotOptimize(fit(data, kSpace));
}
BENCHMARK(BM_FitSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FitParallel)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
