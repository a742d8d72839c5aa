// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>

#include "farmsim/engine.hpp"
#include "farmsim/pool.hpp"
#include "farmsim/scenario_io.hpp"

using namespace farmsim;

namespace {

// A farm with pilots up and an idle backlog, negotiated repeatedly.
Scenario backlog_scenario(int idle_jobs) {
    Scenario sc = load_preset("p5_vacuum");
    sc.duration_s = 600;
    sc.workload.clear();
    JobStreamSpec st;
    st.name = "burst";
    st.pool = PoolId::CERNPool;
    st.schedd = "wma1";
    st.job_class = JobClass::Production;
    st.cores = 1;
    st.desired_sites = "T2_CH_CERN_P5";
    st.work.kind = WorkSpec::Kind::Fixed;
    st.work.seconds = 36000;
    st.arrivals.kind = ArrivalSpec::Kind::Explicit;
    for (int i = 0; i < idle_jobs; ++i) st.arrivals.times_s.push_back(0);
    sc.workload.push_back(st);
    return sc;
}

} // namespace

static void NegotiationCycleBacklog(benchmark::State& state) {
    Scenario sc = backlog_scenario(static_cast<int>(state.range(0)));
    World w(sc);
    // bring pilots up and enqueue the burst without starting anything
    for (auto& [id, m] : w.machines) w.launcher_tick(m);
    for (const auto& pj : w.stream_jobs[0]) submit(w, pj.pool, pj.job.schedd, pj.job, 0);
    for (auto _ : state) {
        auto placed = negotiation_cycle(w, PoolId::CERNPool, w.now);
        benchmark::DoNotOptimize(placed);
        state.PauseTiming();
        for (const auto& p : placed) requeue_job(w, p.job_id, FailReason::Other, w.now);
        state.ResumeTiming();
    }
}
BENCHMARK(NegotiationCycleBacklog)->Arg(100)->Arg(1000)->Arg(5000);
