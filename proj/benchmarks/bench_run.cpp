// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>

#include "farmsim/engine.hpp"
#include "farmsim/scenario_io.hpp"

using namespace farmsim;

static void RunVacuumDay(benchmark::State& state) {
    Scenario sc = load_preset("p5_vacuum");
    sc.duration_s = 86400;
    for (auto _ : state) {
        RunResult r = run(sc);
        benchmark::DoNotOptimize(r.metrics.samples.size());
    }
}
BENCHMARK(RunVacuumDay)->Unit(benchmark::kMillisecond);

static void RunStaticDefragDay(benchmark::State& state) {
    Scenario sc = load_preset("hlt_run2_static");
    sc.duration_s = 86400;
    for (auto _ : state) {
        RunResult r = run(sc);
        benchmark::DoNotOptimize(r.metrics.samples.size());
    }
}
BENCHMARK(RunStaticDefragDay)->Unit(benchmark::kMillisecond);
