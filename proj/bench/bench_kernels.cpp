#include "confsel/parallel.hpp"
#include "confsel/pvalues.hpp"
#include "confsel/reference.hpp"
#include "confsel/rng.hpp"
#include "confsel/selection.hpp"
#include "confsel/simlab.hpp"

#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

using namespace confsel;

namespace {

struct Problem {
    WeightedCalibration calib;
    WeightedTest test;
};

Problem make_problem(std::size_t n, std::size_t m) {
    rng::KeyedStream s(17, rng::Stream::trial_data, n * 1000003 + m);
    std::vector<double> cv(n), cw(n), tv(m), tw(m);
    for (std::size_t i = 0; i < n; ++i) {
        cv[i] = s.normal();
        cw[i] = std::exp(0.5 * s.normal());
    }
    for (std::size_t j = 0; j < m; ++j) {
        tv[j] = s.normal() - 1.5 * (j % 3 == 0);
        tw[j] = std::exp(0.5 * s.normal());
    }
    return {WeightedCalibration(cv, cw), WeightedTest(tv, tw)};
}

// Worker count: 0 means "reference", otherwise a cap on OpenMP workers.
void PValues(benchmark::State& state) {
    const auto p = make_problem(static_cast<std::size_t>(state.range(0)),
                                static_cast<std::size_t>(state.range(1)));
    const int workers = static_cast<int>(state.range(2));
    for (auto _ : state) {
        if (workers == 0) {
            benchmark::DoNotOptimize(reference::pvalues_nonrandomized(p.calib, p.test));
        } else {
            ScopedWorkerLimit limit(workers);
            benchmark::DoNotOptimize(wcp_nonrandomized(p.calib, p.test));
        }
    }
}

void Wcs(benchmark::State& state) {
    const auto p = make_problem(static_cast<std::size_t>(state.range(0)),
                                static_cast<std::size_t>(state.range(1)));
    const int workers = static_cast<int>(state.range(2));
    SelectionConfig cfg;
    cfg.method = Method::wcs_hete;
    for (auto _ : state) {
        if (workers == 0) {
            benchmark::DoNotOptimize(reference::wcs(p.calib, p.test, cfg));
        } else {
            ScopedWorkerLimit limit(workers);
            benchmark::DoNotOptimize(wcs(p.calib, p.test, cfg));
        }
    }
}

void Trials(benchmark::State& state) {
    simlab::SimulationSpec spec;
    spec.scenario = simlab::Scenario::ite1;
    spec.trials = 64;
    ScopedWorkerLimit limit(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(simlab::run_trials(spec));
}

} // namespace

BENCHMARK(PValues)
    ->ArgNames({"n", "m", "workers"})
    ->Args({1000, 200, 0})
    ->Args({1000, 200, 1})
    ->Args({1000, 200, 4})
    ->Args({50000, 2000, 1})
    ->Args({50000, 2000, 4})
    ->Unit(benchmark::kMillisecond);
BENCHMARK(Wcs)
    ->ArgNames({"n", "m", "workers"})
    ->Args({250, 100, 0})
    ->Args({250, 100, 1})
    ->Args({250, 100, 4})
    ->Args({50000, 2000, 1})
    ->Args({50000, 2000, 4})
    ->Unit(benchmark::kMillisecond);
BENCHMARK(Trials)->ArgName("workers")->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
