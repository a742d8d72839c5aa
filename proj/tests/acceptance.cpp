// SPDX-License-Identifier: Apache-2.0
//
// Acceptance suite: end-to-end checks of the simulator's contractual
// behavior, one printed PASS/FAIL line per criterion.  Exits non-zero if
// anything fails.

#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "farmsim/engine.hpp"
#include "farmsim/expr.hpp"
#include "farmsim/metrics.hpp"
#include "farmsim/scenario_io.hpp"

using namespace farmsim;

namespace {

int g_failures = 0;

void report(const std::string& id, bool pass, const std::string& detail = "") {
    std::printf("%-30s %s%s%s\n", id.c_str(), pass ? "PASS" : "FAIL",
                detail.empty() ? "" : "  -- ", detail.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

constexpr const char* kP5 = "T2_CH_CERN_P5";
constexpr const char* kCH = "T2_CH_CERN";

Scenario base_farm(PilotModel model, const std::string& site, int machines = 100) {
    Scenario sc;
    sc.seed = 42;
    sc.duration_s = 604800;
    sc.metrics_interval_s = 300;
    MachineGroup g;
    g.name_prefix = "n";
    g.count = machines;
    g.cores = 16;
    g.memory_mb = 32000;
    g.site = site;
    sc.machines = {g};
    sc.provisioning.model = model;
    sc.provisioning.static_start_expr = "true";
    PoolSpec pool;
    pool.id = PoolId::GlobalPool;
    sc.pools = {pool};
    sc.lhc.transitions = {{0, Phase::Interfill}};
    return sc;
}

JobStreamSpec poisson_stream(const std::string& name, JobClass cls, int cores, double rate,
                             double work_mean, const std::string& sites) {
    JobStreamSpec st;
    st.name = name;
    st.job_class = cls;
    st.cores = cores;
    st.desired_sites = sites;
    st.arrivals.kind = ArrivalSpec::Kind::Poisson;
    st.arrivals.rate_per_s = rate;
    st.work.kind = WorkSpec::Kind::ExponentialMean;
    st.work.seconds = work_mean;
    return st;
}

// Saturating one-core production load plus a single 8-core job submitted on
// day two; the shared workload for the starvation and renewal criteria.
Scenario starvation_scenario(PilotModel model, bool defrag_enabled) {
    Scenario sc = base_farm(model, kP5);
    sc.name = defrag_enabled ? "starvation_defrag" : "starvation_plain";
    sc.workload.push_back(poisson_stream("prod1c", JobClass::Production, 1, 0.05, 43200, kP5));
    JobStreamSpec t0;
    t0.name = "t0big";
    t0.job_class = JobClass::Tier0;
    t0.cores = 8;
    t0.memory_mb = 16000;
    t0.desired_sites = kP5;
    t0.arrivals.kind = ArrivalSpec::Kind::Explicit;
    t0.arrivals.times_s = {86400};
    t0.work.kind = WorkSpec::Kind::Fixed;
    t0.work.seconds = 14400;
    sc.workload.push_back(t0);
    sc.defrag.enabled = defrag_enabled;
    return sc;
}

// ---------------------------------------------------------------------------

// Truth table of the two published policy expressions over the eight
// combinations of {site list absent, matching, non-matching, multi-entry
// matching} x {agent name present, absent}.  Hand-derived outcomes: a P5
// slot is matched exactly when the job names the site AND carries an agent
// name; an absent site list leaves the requirement undefined (no match).
void a1_expression_conformance() {
    expr::ExprPtr reqs = expr::parse(kSiteListRequirementsExpr);
    expr::ExprPtr start = expr::parse(kProductionOnlyStartExpr);

    expr::AttributeSet slot;
    slot.set("GLIDEIN_CMSSite", expr::Value::str(kP5));

    struct Case {
        const char* desired; // nullptr = absent
        bool agent_present;
        bool expect_match;
    };
    const Case cases[] = {
        {nullptr, true, false},                      // undefined guard -> no match
        {nullptr, false, false},
        {"T2_CH_CERN_P5", true, true},               // production/tier0 with P5 listed
        {"T2_CH_CERN_P5", false, false},             // analysis never matches
        {"T2_US_Nowhere", true, false},              // site not listed
        {"T2_US_Nowhere", false, false},
        {"T2_US_Nowhere,T2_CH_CERN_P5", true, true}, // multi-entry list containing P5
        {"T2_US_Nowhere,T2_CH_CERN_P5", false, false},
    };

    bool ok = true;
    std::string detail;
    for (const Case& c : cases) {
        expr::AttributeSet job;
        if (c.desired) job.set("DESIRED_Sites", expr::Value::str(c.desired));
        if (c.agent_present) job.set("WMAgent_AgentName", expr::Value::str("wmagent-prod"));
        bool got = expr::matches(reqs, start, job, slot);
        if (got != c.expect_match) {
            ok = false;
            detail = std::string("desired=") + (c.desired ? c.desired : "<absent>") +
                     " agent=" + (c.agent_present ? "yes" : "no");
            break;
        }
    }

    // spot checks of the underlying evaluations
    expr::AttributeSet empty;
    expr::AttributeSet p5my;
    p5my.set("GLIDEIN_CMSSite", expr::Value::str(kP5));
    ok = ok && expr::identical(expr::evaluate(start, p5my, empty), expr::Value::boolean(false));
    ok = ok && expr::evaluate(reqs, empty, p5my).is_undefined();

    report("A1 expression-conformance", ok, detail);
}

void a2_hibernation_boundary() {
    auto make = [](double fill_end) {
        Scenario sc = base_farm(PilotModel::StaticStartd, kP5, 4);
        sc.name = "hibernation";
        sc.duration_s = 300000;
        sc.machines[0].availability = AvailabilityClass::Opportunistic;
        sc.lhc.transitions = {{0, Phase::Interfill}, {40000, Phase::Fill},
                              {fill_end, Phase::Interfill}};
        JobStreamSpec st;
        st.name = "job";
        st.job_class = JobClass::Production;
        st.cores = 4;
        st.desired_sites = kP5;
        st.arrivals.kind = ArrivalSpec::Kind::Explicit;
        st.arrivals.times_s = {0, 60, 120};
        st.work.kind = WorkSpec::Kind::Fixed;
        st.work.seconds = 50000;
        sc.workload = {st};
        return sc;
    };

    bool ok = true;
    std::string detail;

    // fill of 14400 s: resume with progress intact, wall clock is exact
    RunResult resumed = run(make(40000 + 14400));
    if (resumed.jobs.size() != 3) ok = false;
    for (const auto& [id, j] : resumed.jobs) {
        if (j.state != JobState::Completed || !j.first_start_time ||
            *j.completion_time != *j.first_start_time + 50000.0 + 14400.0) {
            ok = false;
            detail = "resume path broke the wall-clock identity for " + id;
        }
        if (j.hibernation_timeouts != 0) ok = false;
    }

    // fill of 90000 s (> 86400): requeued, restarted from zero
    RunResult requeued = run(make(40000 + 90000));
    for (const auto& [id, j] : requeued.jobs) {
        if (j.hibernation_timeouts != 1 || j.state != JobState::Completed) {
            ok = false;
            detail = "requeue path did not restart " + id;
            continue;
        }
        double restart = -1;
        for (const auto& t : requeued.trace.jobs)
            if (t.job_id == id && t.from == JobState::Idle && t.to == JobState::Running)
                restart = t.time;
        if (restart < 130000.0 || *j.completion_time != restart + 50000.0) {
            ok = false;
            detail = "restart-from-zero identity broke for " + id;
        }
    }

    report("A2 hibernation-boundary", ok, detail);
}

void a3_starvation_and_defrag() {
    RunResult plain = run(starvation_scenario(PilotModel::StaticStartd, false));
    const JobOutcome& starved = plain.jobs.at("t0big-000000");
    bool starved_ok = starved.state == JobState::Idle && !starved.first_start_time;

    RunResult defragged = run(starvation_scenario(PilotModel::StaticStartd, true));
    const JobOutcome& rescued = defragged.jobs.at("t0big-000000");
    bool rescued_ok = rescued.first_start_time.has_value() &&
                      *rescued.first_start_time < 604800.0;

    std::string detail;
    if (!starved_ok) detail = "8-core job started without defrag";
    if (!rescued_ok)
        detail += std::string(detail.empty() ? "" : "; ") + "8-core job idle despite defrag";
    if (starved_ok && rescued_ok)
        detail = "idle without defrag; starts at t=" +
                 std::to_string(*rescued.first_start_time) + "s with it";
    report("A3 starvation-and-defrag", starved_ok && rescued_ok, detail);
}

void a4_validation_gap() {
    auto make = [](PilotModel model) {
        Scenario sc = base_farm(model, kP5);
        sc.name = "validation_gap";
        sc.duration_s = 86400;
        sc.unhealthy_fraction = 0.2;
        JobStreamSpec st = poisson_stream("load", JobClass::Production, 1, 0.5, 3600, kP5);
        st.arrivals.max_count = 2000;
        sc.workload = {st};
        return sc;
    };

    RunResult stat = run(make(PilotModel::StaticStartd));
    std::int64_t failures = stat.metrics.summary.failures.at("validation_gap");
    std::set<std::string> unhealthy(stat.unhealthy_machines.begin(),
                                    stat.unhealthy_machines.end());
    std::int64_t routed = 0;
    for (const auto& t : stat.trace.jobs)
        if (t.to == JobState::Running && unhealthy.count(t.machine_id)) ++routed;

    const double n = 2000, p = 0.2;
    const double sigma = std::sqrt(n * p * (1 - p));
    const double lo = n * p - 3 * sigma, hi = n * p + 3 * sigma;
    bool static_ok = failures >= 1 && failures == routed && failures >= lo && failures <= hi;

    RunResult vac = run(make(PilotModel::VacuumGlidein));
    std::int64_t vac_failures = vac.metrics.summary.failures.at("validation_gap");
    bool vacuum_ok = vac_failures == 0 && vac.metrics.summary.pilot_validation_failures > 0;

    char detail[160];
    std::snprintf(detail, sizeof(detail),
                  "static=%lld routed=%lld (band [%.1f, %.1f]); vacuum=%lld",
                  static_cast<long long>(failures), static_cast<long long>(routed), lo, hi,
                  static_cast<long long>(vac_failures));
    report("A4 validation-gap", static_ok && vacuum_ok, detail);
}

void a5_natural_renewal() {
    Scenario sc = starvation_scenario(PilotModel::VacuumGlidein, false);
    sc.name = "natural_renewal";
    RunResult r = run(sc);
    const JobOutcome& t0 = r.jobs.at("t0big-000000");
    double bound = 86400.0 + sc.provisioning.glidein.max_walltime_s +
                   sc.provisioning.glidein.retire_grace_s +
                   sc.pools[0].negotiator.cycle_interval_s;
    bool ok = t0.first_start_time.has_value() && *t0.first_start_time <= bound;
    char detail[120];
    std::snprintf(detail, sizeof(detail), "start %s <= bound %.0f",
                  t0.first_start_time ? std::to_string(*t0.first_start_time).c_str() : "never",
                  bound);
    report("A5 natural-slot-renewal", ok, detail);
}

void a6_config_staleness() {
    // vacuum: every pilot alive at reconfigure + walltime + grace runs the
    // new wrapper
    Scenario vac = base_farm(PilotModel::VacuumGlidein, kP5);
    vac.name = "staleness_vacuum";
    vac.workload.push_back(poisson_stream("prod1c", JobClass::Production, 1, 0.05, 43200, kP5));
    vac.provisioning.frontend.reconfigure_times_s = {86400};
    RunResult rv = run(vac);

    double t_bound = 86400.0 + vac.provisioning.glidein.max_walltime_s +
                     vac.provisioning.glidein.retire_grace_s;
    struct Life {
        double launch = -1;
        double end = -1; // -1: alive at horizon
        std::int64_t version = 0;
    };
    std::map<std::string, Life> lives;
    for (const auto& t : rv.trace.pilots) {
        if (t.reason == "launch") {
            lives[t.pilot_id].launch = t.time;
            lives[t.pilot_id].version = t.wrapper_version;
        } else if (t.to == PilotState::Terminated) {
            lives[t.pilot_id].end = t.time;
        }
    }
    int live_at_bound = 0, stale_at_bound = 0;
    for (const auto& [id, l] : lives) {
        if (l.launch < 0 || l.launch > t_bound) continue;
        if (l.end >= 0 && l.end <= t_bound) continue;
        ++live_at_bound;
        if (l.version != 2) ++stale_at_bound;
    }
    bool vacuum_ok = live_at_bound > 0 && stale_at_bound == 0;

    // static: still on the original image at the horizon without a rebuild
    Scenario stat = base_farm(PilotModel::StaticStartd, kP5);
    stat.name = "staleness_static";
    stat.workload = vac.workload;
    stat.provisioning.frontend.reconfigure_times_s = {86400};
    RunResult rs = run(stat);
    bool static_ok = rs.frontend_wrapper_version == 2 && !rs.live_pilots.empty();
    for (const auto& p : rs.live_pilots)
        if (p.wrapper_version != 1) static_ok = false;
    if (rs.metrics.summary.wrapper_staleness_max != 1) static_ok = false;

    char detail[160];
    std::snprintf(detail, sizeof(detail), "vacuum live@bound=%d stale=%d; static live=%zu all v1",
                  live_at_bound, stale_at_bound, rs.live_pilots.size());
    report("A6 config-staleness", vacuum_ok && static_ok, detail);
}

void a7_determinism_conservation() {
    bool ok = true;
    std::string detail;
    const char* presets[] = {"hlt_run2_static", "p5_vacuum", "t0_commissioning",
                             "interfill_opportunistic"};
    for (const std::string name : presets) {
        Scenario sc = load_preset(name);
        RunResult a = run(sc);
        RunResult b = run(sc);
        if (metrics_to_csv(a.metrics) != metrics_to_csv(b.metrics) ||
            a.trace.to_csv() != b.trace.to_csv()) {
            ok = false;
            detail = name + " not byte-identical across reruns";
            break;
        }
        if (a.metrics.samples.size() < 2000) {
            ok = false;
            detail = name + " produced too few samples";
            break;
        }
        std::int64_t total = 0;
        for (const auto& g : sc.machines) total += static_cast<std::int64_t>(g.count) * g.cores;
        for (const auto& s : a.metrics.samples) {
            if (s.cores_running_total() + s.cores_free + s.cores_suspended +
                    s.cores_draining_idle !=
                total) {
                ok = false;
                detail = name + " broke conservation at t=" + std::to_string(s.time);
                break;
            }
        }
        if (!ok) break;
    }
    report("A7 determinism-conservation", ok, detail);
}

void a8_pool_isolation() {
    auto make = [](double global_cycle_s) {
        Scenario sc;
        sc.name = "pool_isolation";
        sc.seed = 42;
        sc.duration_s = 259200;
        MachineGroup ch;
        ch.name_prefix = "ch-";
        ch.count = 40;
        ch.cores = 16;
        ch.memory_mb = 32000;
        ch.site = kCH;
        MachineGroup p5 = ch;
        p5.name_prefix = "p5-";
        p5.site = kP5;
        sc.machines = {ch, p5};
        sc.provisioning.model = PilotModel::VacuumGlidein;
        PoolSpec global;
        global.id = PoolId::GlobalPool;
        global.negotiator.cycle_interval_s = global_cycle_s;
        PoolSpec cern;
        cern.id = PoolId::CERNPool;
        sc.pools = {global, cern};
        sc.site_pools = {{kCH, PoolId::GlobalPool}, {kP5, PoolId::GlobalPool}};
        MigrationSpec mig;
        mig.time_s = 3600;
        mig.site = kP5;
        mig.from = PoolId::GlobalPool;
        mig.to = PoolId::CERNPool;
        sc.migrations = {mig};
        sc.lhc.transitions = {{0, Phase::Interfill}};

        JobStreamSpec chprod = poisson_stream("chprod", JobClass::Production, 1, 1.0 / 30.0,
                                              7200, kCH);
        chprod.pool = PoolId::GlobalPool;
        JobStreamSpec t0 = poisson_stream("t0", JobClass::Tier0, 8, 1.0 / 900.0, 7200, kP5);
        t0.pool = PoolId::CERNPool;
        t0.memory_mb = 16000;
        t0.arrivals.start_s = 7200;
        sc.workload = {chprod, t0};
        return sc;
    };

    RunResult baseline = run(make(60));
    RunResult stalled = run(make(6000)); // cycle_interval x 100 in the global pool

    auto tier0_latencies = [](const RunResult& r) {
        std::map<std::string, double> lat;
        for (const auto& [id, j] : r.jobs)
            if (j.job_class == JobClass::Tier0 && j.pool == PoolId::CERNPool &&
                j.first_start_time)
                lat[id] = *j.first_start_time - j.submit_time;
        return lat;
    };
    auto lat_a = tier0_latencies(baseline);
    auto lat_b = tier0_latencies(stalled);

    bool moved_ok = baseline.trace.migrations.size() == 1 &&
                    baseline.trace.migrations[0].moved == 40;
    bool series_equal = !lat_a.empty() && lat_a == lat_b;
    bool p95_equal =
        baseline.metrics.summary.latency_by_pool_class.at("CERNPool/tier0").p95 ==
        stalled.metrics.summary.latency_by_pool_class.at("CERNPool/tier0").p95;

    // the stall must actually bite on the global side
    bool stall_bites =
        stalled.metrics.summary.latency_by_pool_class.at("GlobalPool/production").p95 >
        baseline.metrics.summary.latency_by_pool_class.at("GlobalPool/production").p95;

    char detail[200];
    std::snprintf(detail, sizeof(detail),
                  "tier0 series n=%zu equal=%d p95_equal=%d moved=%d stall_bites=%d",
                  lat_a.size(), series_equal ? 1 : 0, p95_equal ? 1 : 0, moved_ok ? 1 : 0,
                  stall_bites ? 1 : 0);
    report("A8 pool-isolation", moved_ok && series_equal && p95_equal && stall_bites, detail);
}

} // namespace

int main() {
    std::printf("farmsim acceptance suite\n");
    a1_expression_conformance();
    a2_hibernation_boundary();
    a3_starvation_and_defrag();
    a4_validation_gap();
    a5_natural_renewal();
    a6_config_staleness();
    a7_determinism_conservation();
    a8_pool_isolation();
    std::printf("%d criteria failed\n", g_failures);
    return g_failures == 0 ? 0 : 1;
}
