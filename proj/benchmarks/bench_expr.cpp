// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>

#include "farmsim/expr.hpp"
#include "farmsim/provisioning.hpp"

using namespace farmsim;

static void ParseSiteGuard(benchmark::State& state) {
    for (auto _ : state) {
        auto e = expr::parse(kSiteListRequirementsExpr);
        benchmark::DoNotOptimize(e);
    }
}
BENCHMARK(ParseSiteGuard);

static void EvaluateMatch(benchmark::State& state) {
    auto reqs = expr::parse(kSiteListRequirementsExpr);
    auto start = expr::parse(kProductionOnlyStartExpr);
    expr::AttributeSet job, slot;
    job.set("DESIRED_Sites", expr::Value::str("T2_CH_CERN_P5,T2_CH_CERN"));
    job.set("WMAgent_AgentName", expr::Value::str("wmagent-prod"));
    slot.set("GLIDEIN_CMSSite", expr::Value::str("T2_CH_CERN_P5"));
    for (auto _ : state) {
        bool ok = expr::matches(reqs, start, job, slot);
        benchmark::DoNotOptimize(ok);
    }
}
BENCHMARK(EvaluateMatch);
