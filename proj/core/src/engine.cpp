/***************************************************************
 *
 * Copyright (C) 2026, the farmsim developers
 *
 * Licensed under the Apache License, Version 2.0 (the "License"); you
 * may not use this file except in compliance with the License.  You may
 * obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 *
 ***************************************************************/

#include "farmsim/engine.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <future>
#include <set>

#include <json.hpp>

#include "farmsim/defrag.hpp"
#include "farmsim/rng.hpp"

namespace farmsim {

// ---------------------------------------------------------------------------
// Scenario validation and workload generation
// ---------------------------------------------------------------------------

namespace {

std::vector<std::string> split_site_list(const std::string& s) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (pos <= s.size()) {
        std::size_t comma = s.find(',', pos);
        std::size_t end = comma == std::string::npos ? s.size() : comma;
        std::size_t b = pos, e = end;
        while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
        while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
        if (e > b) out.push_back(s.substr(b, e - b));
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return out;
}

std::string padded(std::size_t n, int width) {
    std::string digits = std::to_string(n);
    if (static_cast<int>(digits.size()) < width)
        digits.insert(0, static_cast<std::size_t>(width) - digits.size(), '0');
    return digits;
}

int id_width(int count) {
    int w = 1, c = count - 1;
    while (c >= 10) {
        c /= 10;
        ++w;
    }
    return std::max(w, 3);
}

} // namespace

std::vector<std::string> scenario_violations(const Scenario& s) {
    std::vector<std::string> v;
    auto bad = [&](const std::string& msg) { v.push_back(msg); };

    if (s.duration_s <= 0) bad("duration_s must be positive");
    if (s.metrics_interval_s <= 0) bad("metrics_interval_s must be positive");
    if (s.machines.empty()) bad("at least one machine group is required");

    std::set<std::string> sites;
    std::set<std::string> machine_ids;
    for (const auto& g : s.machines) {
        if (g.count < 1) bad("machine group '" + g.name_prefix + "': count must be >= 1");
        if (g.cores < 1) bad("machine group '" + g.name_prefix + "': cores must be >= 1");
        if (g.memory_mb < 1) bad("machine group '" + g.name_prefix + "': memory_mb must be >= 1");
        if (g.site.empty()) bad("machine group '" + g.name_prefix + "': site is required");
        sites.insert(g.site);
        int w = id_width(g.count);
        for (int i = 0; i < g.count; ++i)
            if (!machine_ids.insert(g.name_prefix + padded(i, w)).second)
                bad("duplicate machine id in group '" + g.name_prefix + "'");
    }
    if (s.unhealthy_fraction < 0 || s.unhealthy_fraction > 1)
        bad("unhealthy_fraction must lie in [0, 1]");

    if (s.pools.empty()) bad("at least one pool is required");
    std::set<PoolId> pool_ids;
    for (const auto& p : s.pools) {
        if (!pool_ids.insert(p.id).second)
            bad(std::string("duplicate pool '") + to_string(p.id) + "'");
        if (p.negotiator.cycle_interval_s <= 0) bad("negotiator cycle_interval_s must be positive");
        if (p.negotiator.max_hibernation_s < 0) bad("max_hibernation_s must be >= 0");
        auto order = p.negotiator.class_priority_order;
        std::set<JobClass> classes(order.begin(), order.end());
        if (classes.size() != 3)
            bad("class_priority must be a permutation of tier0/production/analysis");
    }

    const auto& prov = s.provisioning;
    if (prov.glidein.max_idle_s <= 0) bad("glidein max_idle_s must be positive");
    if (prov.glidein.max_walltime_s <= 0) bad("glidein max_walltime_s must be positive");
    if (prov.glidein.max_idle_s > prov.glidein.max_walltime_s)
        bad("glidein max_idle_s must not exceed max_walltime_s");
    if (prov.glidein.retire_grace_s < 0) bad("glidein retire_grace_s must be >= 0");
    if (!prov.glidein.cpus.whole_node && prov.glidein.cpus.fixed < 1)
        bad("glidein fixed cpu count must be >= 1");
    if (prov.launcher_interval_s <= 0) bad("launcher_interval_s must be positive");
    if (prov.validation_retry_backoff_s < 0) bad("validation_retry_backoff_s must be >= 0");
    try {
        expr::parse(prov.glidein.start_expr_source);
    } catch (const expr::SyntaxError& e) {
        bad(std::string("glidein start_expr does not parse: ") + e.what());
    }
    try {
        expr::parse(prov.static_start_expr);
    } catch (const expr::SyntaxError& e) {
        bad(std::string("static_start_expr does not parse: ") + e.what());
    }
    if (prov.frontend.initial_wrapper_version < 0) bad("wrapper_version must be >= 0");
    if (prov.frontend.image_rebuild_delay_s < 0) bad("image_rebuild_delay_s must be >= 0");

    for (const auto& [site, pid] : s.site_pools) {
        if (!sites.count(site)) bad("site_pools references unknown site '" + site + "'");
        if (!pool_ids.count(pid))
            bad(std::string("site_pools references missing pool '") + to_string(pid) + "'");
    }
    for (const auto& m : s.migrations) {
        if (m.from == m.to) bad("migration pools must be distinct");
        if (!pool_ids.count(m.from) || !pool_ids.count(m.to))
            bad("migration references a pool not in the scenario");
        if (!sites.count(m.site)) bad("migration references unknown site '" + m.site + "'");
        if (m.time_s < 0) bad("migration time_s must be >= 0");
    }

    if (s.lhc.generated) {
        if (s.lhc.generated->fill_mean_s <= 0 || s.lhc.generated->interfill_mean_s <= 0)
            bad("generated schedule means must be positive");
    } else if (!s.lhc.transitions.empty()) {
        for (std::size_t i = 1; i < s.lhc.transitions.size(); ++i) {
            if (s.lhc.transitions[i].time <= s.lhc.transitions[i - 1].time)
                bad("lhc schedule times must be strictly increasing");
            if (s.lhc.transitions[i].phase == s.lhc.transitions[i - 1].phase)
                bad("lhc schedule phases must alternate (no self-transition)");
        }
    }

    if (s.defrag.enabled) {
        if (s.defrag.max_concurrent_draining < 1)
            bad("defrag max_concurrent_draining must be >= 1 when enabled");
        if (s.defrag.interval_s <= 0) bad("defrag interval_s must be positive");
        if (s.defrag.whole_slot_target < 1) bad("defrag whole_slot_target must be >= 1");
    }
    if (s.defrag.whole_threshold_cores < 1) bad("defrag whole_threshold_cores must be >= 1");

    std::set<std::string> stream_names;
    for (const auto& st : s.workload) {
        std::string where = "workload stream '" + st.name + "'";
        if (st.name.empty()) bad("workload streams need a name");
        if (!stream_names.insert(st.name).second) bad("duplicate " + where);
        if (!pool_ids.count(st.pool)) bad(where + ": pool is not part of the scenario");
        if (st.cores < 1) bad(where + ": cores must be >= 1");
        if (st.memory_mb < 0) bad(where + ": memory_mb must be >= 0");
        if (st.work.seconds <= 0) bad(where + ": work must be positive");
        if (st.arrivals.kind == ArrivalSpec::Kind::Poisson && st.arrivals.rate_per_s <= 0)
            bad(where + ": poisson rate must be positive");
        for (double t : st.arrivals.times_s)
            if (t < 0) bad(where + ": arrival times must be >= 0");
        for (const auto& site : split_site_list(st.desired_sites))
            if (!sites.count(site)) bad(where + ": DESIRED_Sites names unknown site '" + site + "'");
        if (!st.requirements.empty()) {
            try {
                expr::parse(st.requirements);
            } catch (const expr::SyntaxError& e) {
                bad(where + ": requirements does not parse: " + e.what());
            }
        } else if (st.desired_sites.empty()) {
            bad(where + ": needs desired_sites (or an explicit requirements expression)");
        }
    }
    return v;
}

void validate_scenario(const Scenario& s) {
    auto v = scenario_violations(s);
    if (!v.empty()) throw ScenarioValidationError(std::move(v));
}

std::vector<double> arrival_stream(const ArrivalSpec& spec, std::uint64_t seed,
                                   const std::string& stream_name, double scenario_duration_s) {
    std::vector<double> out;
    if (spec.kind == ArrivalSpec::Kind::Explicit) {
        out = spec.times_s;
        std::sort(out.begin(), out.end());
        while (!out.empty() && out.back() > scenario_duration_s) out.pop_back();
        if (spec.max_count > 0 && static_cast<std::int64_t>(out.size()) > spec.max_count)
            out.resize(spec.max_count);
        return out;
    }
    Rng rng(seed, "arrivals/" + stream_name);
    double end = spec.end_s < 0 ? scenario_duration_s : std::min(spec.end_s, scenario_duration_s);
    double t = spec.start_s;
    while (true) {
        t += rng.exponential(1.0 / spec.rate_per_s);
        if (t > end) break;
        out.push_back(t);
        if (spec.max_count > 0 && static_cast<std::int64_t>(out.size()) >= spec.max_count) break;
    }
    return out;
}

// ---------------------------------------------------------------------------
// World construction
// ---------------------------------------------------------------------------

World::World(Scenario sc) : scenario(std::move(sc)) {
    seed = scenario.seed;
    init();
}

World::World(Scenario sc, std::uint64_t seed_override) : scenario(std::move(sc)) {
    scenario.seed = seed_override;
    seed = seed_override;
    init();
}

void World::init() {
    validate_scenario(scenario);

    // machines
    std::vector<std::string> ids;
    for (const auto& g : scenario.machines) {
        int w = id_width(g.count);
        for (int i = 0; i < g.count; ++i) {
            Machine m;
            m.id = g.name_prefix + padded(i, w);
            m.total_cores = g.cores;
            m.memory_mb = g.memory_mb;
            m.site = g.site;
            m.availability = g.availability;
            ids.push_back(m.id);
            machines.emplace(m.id, std::move(m));
        }
    }

    // exactly round(fraction * N) machines are marked unhealthy, selected by
    // a seeded shuffle so the count is stable across seeds
    if (scenario.unhealthy_fraction > 0) {
        std::sort(ids.begin(), ids.end());
        Rng rng(seed, "health");
        for (std::size_t i = ids.size(); i > 1; --i)
            std::swap(ids[i - 1], ids[rng.below(i)]);
        auto n_bad = static_cast<std::size_t>(
            std::llround(scenario.unhealthy_fraction * static_cast<double>(ids.size())));
        for (std::size_t i = 0; i < n_bad && i < ids.size(); ++i)
            machines.at(ids[i]).cvmfs_healthy = false;
    }

    // pools and site routing
    for (const auto& ps : scenario.pools) {
        Pool p;
        p.id = ps.id;
        p.negotiator = ps.negotiator;
        pools.emplace(ps.id, std::move(p));
    }
    for (const auto& g : scenario.machines)
        site_pool.try_emplace(g.site, scenario.pools.front().id);
    for (const auto& [site, pid] : scenario.site_pools) site_pool[site] = pid;

    // frontend
    frontend.wrapper_version = scenario.provisioning.frontend.initial_wrapper_version;
    frontend.published_config = scenario.provisioning.glidein;
    if (!frontend.published_config.start_expr)
        frontend.published_config.start_expr =
            expr::parse(frontend.published_config.start_expr_source);
    scenario.provisioning.glidein = frontend.published_config;
    static_image_version = frontend.wrapper_version;

    // accelerator phases
    phase_plan = materialize_schedule(scenario.lhc, seed, scenario.duration_s);
    if (phase_plan.empty()) phase_plan = {{0, Phase::Interfill}};
    current_phase = phase_at(phase_plan, 0);
    for (auto& [id, m] : machines)
        m.available = machine_available(m.availability, current_phase);

    // recurring drivers; scheduling order fixes same-instant sequencing
    {
        Event launcher;
        launcher.time = 0;
        launcher.kind = EventKind::LauncherTick;
        schedule(launcher);
    }
    if (scenario.defrag.enabled) {
        Event d;
        d.time = 0;
        d.kind = EventKind::DefragCycle;
        schedule(d);
    }
    for (std::size_t i = 0; i < phase_plan.size(); ++i) {
        if (phase_plan[i].time <= 0 || phase_plan[i].time > scenario.duration_s) continue;
        Event ev;
        ev.time = phase_plan[i].time;
        ev.kind = EventKind::PhaseChange;
        ev.index = i;
        schedule(ev);
    }

    // workload: all job parameters drawn now, per-stream rng labels
    stream_jobs.resize(scenario.workload.size());
    for (std::size_t si = 0; si < scenario.workload.size(); ++si) {
        const JobStreamSpec& st = scenario.workload[si];
        auto arrivals = arrival_stream(st.arrivals, seed, st.name, scenario.duration_s);
        Rng work_rng(seed, "work/" + st.name);
        expr::ExprPtr reqs = expr::parse(
            st.requirements.empty() ? kSiteListRequirementsExpr : st.requirements);
        auto& jobs = stream_jobs[si];
        jobs.reserve(arrivals.size());
        for (std::size_t k = 0; k < arrivals.size(); ++k) {
            PendingJob pj;
            pj.arrival_time = arrivals[k];
            pj.pool = st.pool;
            JobAd& j = pj.job;
            j.id = st.name + "-" + padded(k, 6);
            j.job_class = st.job_class;
            j.request_cores = st.cores;
            j.request_memory_mb = st.memory_mb > 0 ? st.memory_mb : st.cores * 2000ll;
            j.work_seconds = st.work.kind == WorkSpec::Kind::Fixed
                                 ? st.work.seconds
                                 : work_rng.exponential(st.work.seconds);
            j.remaining_seconds = j.work_seconds;
            j.schedd = st.schedd;
            j.requirements = reqs;
            if (!st.desired_sites.empty())
                j.attributes.set("DESIRED_Sites", expr::Value::str(st.desired_sites));
            if (st.job_class != JobClass::Analysis)
                j.attributes.set("WMAgent_AgentName", expr::Value::str("wmagent-" + st.name));
            Event ev;
            ev.time = pj.arrival_time;
            ev.kind = EventKind::JobArrival;
            ev.stream = si;
            ev.index = k;
            schedule(ev);
            jobs.push_back(std::move(pj));
        }
    }

    for (const auto& ps : scenario.pools) {
        Event ev;
        ev.time = 0;
        ev.kind = EventKind::NegotiationCycle;
        ev.pool = ps.id;
        schedule(ev);
    }
    {
        Event ev;
        ev.time = 0;
        ev.kind = EventKind::MetricsSample;
        schedule(ev);
    }
    for (double t : scenario.provisioning.frontend.reconfigure_times_s) {
        if (t < 0 || t > scenario.duration_s) continue;
        Event ev;
        ev.time = t;
        ev.kind = EventKind::FrontendReconfigure;
        schedule(ev);
    }
    for (double t : scenario.provisioning.frontend.image_rebuild_times_s) {
        if (t < 0 || t > scenario.duration_s) continue;
        Event ev;
        ev.time = t;
        ev.kind = EventKind::ImageRebuild;
        schedule(ev);
    }
    for (std::size_t i = 0; i < scenario.migrations.size(); ++i) {
        Event ev;
        ev.time = scenario.migrations[i].time_s;
        ev.kind = EventKind::MigrateSite;
        ev.migration = i;
        schedule(ev);
    }
}

// ---------------------------------------------------------------------------
// Scheduling plumbing
// ---------------------------------------------------------------------------

void World::schedule(Event ev) {
    if (ev.time < now)
        throw InvariantViolation("event scheduled in the past: t=" + std::to_string(ev.time) +
                                 " now=" + std::to_string(now));
    ev.seq = next_seq++;
    queue.push(std::move(ev));
}

void World::schedule_job_completion(const JobAd& job) {
    Event ev;
    ev.time = now + job.remaining_seconds;
    ev.kind = EventKind::JobCompletion;
    ev.job_id = job.id;
    ev.epoch = job.epoch;
    schedule(ev);
}

void World::schedule_pilot_deadline(const Pilot& p, PilotDeadline kind, double at) {
    Event ev;
    ev.time = at;
    ev.kind = EventKind::PilotTick;
    ev.pilot_id = p.id;
    ev.deadline = kind;
    schedule(ev);
}

Pool& World::pool(PoolId id) {
    auto it = pools.find(id);
    if (it == pools.end())
        throw SimError(ErrorKind::OutOfRange,
                       std::string("pool not in scenario: ") + to_string(id));
    return it->second;
}

Pilot* World::live_pilot_on(const Machine& m) {
    if (m.live_pilot.empty()) return nullptr;
    auto it = pilots.find(m.live_pilot);
    return it == pilots.end() ? nullptr : &it->second;
}

JobAd* World::find_job(const std::string& id) {
    for (auto& [pid, p] : pools) {
        auto it = p.jobs.find(id);
        if (it != p.jobs.end()) return &it->second;
    }
    return nullptr;
}

PoolId World::pool_for_site(const std::string& site) const {
    auto it = site_pool.find(site);
    if (it == site_pool.end()) return scenario.pools.front().id;
    return it->second;
}

bool World::machine_available_now(const Machine& m) const { return m.available; }

std::vector<const PartitionableSlot*> World::live_pslots() const {
    std::vector<const PartitionableSlot*> out;
    out.reserve(pilots.size());
    for (const auto& [id, p] : pilots) {
        if (p.state != PilotState::Registered || p.suspended) continue;
        if (!machines.at(p.machine_id).available) continue;
        out.push_back(&p.pslot);
    }
    return out;
}

int World::current_whole_count() const {
    return whole_machine_count(live_pslots(), scenario.defrag.whole_threshold_cores);
}

// ---------------------------------------------------------------------------
// Phase handling
// ---------------------------------------------------------------------------

void World::apply_phase_change(Phase from, Phase to) {
    trace.phase_event(now, from, to);
    current_phase = to;
    for (auto& [id, m] : machines) {
        bool avail = machine_available(m.availability, to);
        if (avail == m.available) continue;
        m.available = avail;

        if (!avail) {
            // beam back: freeze the whole VM, jobs and all
            Pilot* p = live_pilot_on(m);
            if (!p) continue;
            p->suspended = true;
            trace.pilot_event(now, *p, p->state, p->state, "suspend");
            std::vector<std::string> running;
            for (const auto& d : p->pslot.dynamic_slots)
                if (d.claimed_job) running.push_back(*d.claimed_job);
            for (const auto& jid : running) {
                JobAd* job = find_job(jid);
                if (job && job->state == JobState::Running) suspend_job(*this, jid, now);
            }
            continue;
        }

        Pilot* p = live_pilot_on(m);
        if (!p) {
            Event ev;
            ev.time = now;
            ev.kind = EventKind::LauncherTick;
            ev.machine_id = m.id;
            schedule(ev);
            continue;
        }
        p->suspended = false;
        trace.pilot_event(now, *p, p->state, p->state, "resume");
        std::vector<std::string> frozen;
        for (const auto& d : p->pslot.dynamic_slots)
            if (d.claimed_job) frozen.push_back(*d.claimed_job);
        for (const auto& jid : frozen) {
            JobAd* job = find_job(jid);
            if (job && job->state == JobState::Suspended) resume_or_requeue(*this, jid, now);
        }
        // the pilot may have terminated while releasing requeued claims
        Pilot* again = live_pilot_on(m);
        if (again && again->model == PilotModel::VacuumGlidein &&
            again->state == PilotState::Registered && again->pslot.dynamic_slots.empty()) {
            again->idle_since = now;
            schedule_pilot_deadline(*again, PilotDeadline::IdleTimeout,
                                    now + again->config.max_idle_s);
        }
    }
}

// ---------------------------------------------------------------------------
// Event loop
// ---------------------------------------------------------------------------

void World::process(const Event& ev) {
    if (ev.time < now) throw InvariantViolation("event time regressed");
    now = ev.time;

    switch (ev.kind) {
        case EventKind::NegotiationCycle: {
            negotiation_cycle(*this, ev.pool, now);
            Event next;
            next.time = now + pool(ev.pool).negotiator.cycle_interval_s;
            next.kind = EventKind::NegotiationCycle;
            next.pool = ev.pool;
            if (next.time <= scenario.duration_s) schedule(next);
            break;
        }
        case EventKind::LauncherTick: {
            if (ev.machine_id.empty()) {
                for (auto& [id, m] : machines) launcher_tick(m);
                Event next;
                next.time = now + scenario.provisioning.launcher_interval_s;
                next.kind = EventKind::LauncherTick;
                if (next.time <= scenario.duration_s) schedule(next);
            } else {
                launcher_tick(machines.at(ev.machine_id));
            }
            break;
        }
        case EventKind::PilotTick:
            pilot_deadline_event(ev);
            break;
        case EventKind::DefragCycle: {
            defrag_cycle(*this, now);
            Event next;
            next.time = now + scenario.defrag.interval_s;
            next.kind = EventKind::DefragCycle;
            if (next.time <= scenario.duration_s) schedule(next);
            break;
        }
        case EventKind::PhaseChange: {
            const PhaseTransition& tr = phase_plan.at(ev.index);
            apply_phase_change(current_phase, tr.phase);
            break;
        }
        case EventKind::JobArrival: {
            const PendingJob& pj = stream_jobs.at(ev.stream).at(ev.index);
            submit(*this, pj.pool, pj.job.schedd, pj.job, now);
            break;
        }
        case EventKind::JobCompletion: {
            JobAd* job = find_job(ev.job_id);
            if (!job || job->epoch != ev.epoch || job->state != JobState::Running)
                break; // superseded by suspend/requeue
            const Machine& m = machines.at(job->machine_id);
            const Pilot& p = pilots.at(job->pilot_id);
            if (p.model == PilotModel::StaticStartd && !m.cvmfs_healthy)
                fail_job(*this, ev.job_id, FailReason::ValidationGap, now);
            else
                complete_job(*this, ev.job_id, now);
            break;
        }
        case EventKind::FrontendReconfigure:
            frontend_reconfigure();
            break;
        case EventKind::ImageRebuild:
            rebuild_image();
            break;
        case EventKind::MetricsSample: {
            take_metrics_sample();
            check_invariants_deep();
            Event next;
            next.time = now + scenario.metrics_interval_s;
            next.kind = EventKind::MetricsSample;
            if (next.time <= scenario.duration_s) schedule(next);
            break;
        }
        case EventKind::MigrateSite: {
            const MigrationSpec& m = scenario.migrations.at(ev.migration);
            migrate_site(*this, m.from, m.to, m.site);
            break;
        }
    }

    check_invariants_cheap();
}

void World::run_loop() {
    while (!queue.empty() && queue.top().time <= scenario.duration_s) {
        Event ev = queue.top();
        queue.pop();
        process(ev);
    }
    now = scenario.duration_s;
}

// ---------------------------------------------------------------------------
// Metrics and invariants
// ---------------------------------------------------------------------------

void World::take_metrics_sample() {
    MetricsSample s;
    s.time = now;
    for (auto& [id, m] : machines) {
        Pilot* p = live_pilot_on(m);
        if (!p) {
            s.cores_free += m.total_cores;
            continue;
        }
        const PartitionableSlot& ps = p->pslot;
        s.cores_free += m.total_cores - ps.total_cores; // outside a fixed-size pslot
        if (p->suspended) {
            s.cores_suspended += ps.total_cores;
            continue;
        }
        for (const auto& d : ps.dynamic_slots) {
            if (!d.claimed_job) {
                s.cores_free += d.cores;
                continue;
            }
            JobAd* job = find_job(*d.claimed_job);
            if (job && job->state == JobState::Running) {
                switch (job->job_class) {
                    case JobClass::Tier0: s.cores_running_tier0 += d.cores; break;
                    case JobClass::Production: s.cores_running_production += d.cores; break;
                    case JobClass::Analysis: s.cores_running_analysis += d.cores; break;
                }
            } else {
                s.cores_suspended += d.cores;
            }
        }
        if (ps.draining || p->state == PilotState::Retiring)
            s.cores_draining_idle += ps.free_cores;
        else
            s.cores_free += ps.free_cores;
    }
    s.whole_slots = current_whole_count();
    s.idle_tier0 = idle_count[0];
    s.idle_production = idle_count[1];
    s.idle_analysis = idle_count[2];

    std::int64_t total = 0;
    for (const auto& [id, m] : machines) total += m.total_cores;
    std::int64_t accounted = s.cores_running_total() + s.cores_free + s.cores_suspended +
                             s.cores_draining_idle;
    if (accounted != total)
        throw InvariantViolation("core conservation broken at t=" + std::to_string(now) + ": " +
                                 std::to_string(accounted) + " != " + std::to_string(total));

    for (const auto& [id, p] : pilots)
        wrapper_staleness_max =
            std::max(wrapper_staleness_max, frontend.wrapper_version - p.wrapper_version);

    metrics.samples.push_back(s);
}

void World::check_invariants_cheap() const {
    for (const auto& [id, p] : pilots)
        if (!conserves(p.pslot))
            throw InvariantViolation("pslot resource conservation broken on " + p.machine_id);
    if (claims != jobs_running + jobs_suspended)
        throw InvariantViolation("claim count diverged from running+suspended jobs");
}

void World::check_invariants_deep() const {
    // claims <-> jobs bijection
    std::int64_t claimed_slots = 0;
    for (const auto& [id, p] : pilots) {
        if (!p.live()) throw InvariantViolation("terminated pilot retained: " + id);
        const Machine& m = machines.at(p.machine_id);
        if (m.live_pilot != p.id)
            throw InvariantViolation("machine/pilot link broken on " + m.id);
        for (const auto& d : p.pslot.dynamic_slots) {
            if (!d.claimed_job)
                throw InvariantViolation("unclaimed dynamic slot " + d.id);
            ++claimed_slots;
        }
    }
    std::int64_t busy_jobs = 0;
    int draining = 0;
    for (const auto& [pid, pool] : pools) {
        for (const auto& [jid, job] : pool.jobs) {
            if (job.state != JobState::Running && job.state != JobState::Suspended) {
                if (job.claimed())
                    throw InvariantViolation("inactive job holds a claim: " + jid);
                continue;
            }
            ++busy_jobs;
            auto it = pilots.find(job.pilot_id);
            if (it == pilots.end())
                throw InvariantViolation("busy job on missing pilot: " + jid);
            const Pilot& p = it->second;
            auto* d = find_dynamic_slot(const_cast<PartitionableSlot&>(p.pslot), job.dyn_slot_id);
            if (!d || !d->claimed_job || *d->claimed_job != jid)
                throw InvariantViolation("claim mismatch for job " + jid);
            if (job.state == JobState::Running && !machines.at(job.machine_id).available)
                throw InvariantViolation("job running on unavailable machine: " + jid);
        }
    }
    for (const auto& [id, p] : pilots)
        if (p.pslot.draining) ++draining;
    if (claimed_slots != busy_jobs)
        throw InvariantViolation("dynamic slot claims do not match busy jobs");
    if (scenario.defrag.enabled && draining > scenario.defrag.max_concurrent_draining)
        throw InvariantViolation("draining pslots exceed max_concurrent_draining");
}

MetricsSummary World::finalize_summary() {
    MetricsSummary s;
    s.scenario_name = scenario.name;
    s.seed = seed;
    s.duration_s = scenario.duration_s;

    std::map<std::string, std::vector<double>> lat_class, lat_pool_class;
    for (const auto& [pid, pool] : pools) {
        for (const auto& [jid, job] : pool.jobs) {
            std::string cls = to_string(job.job_class);
            std::string pool_cls = std::string(to_string(pid)) + "/" + cls;
            ++s.latency_by_class[cls].submitted;
            ++s.latency_by_pool_class[pool_cls].submitted;
            ++s.jobs_submitted;
            if (job.first_start_time) {
                double lat = *job.first_start_time - job.submit_time;
                ++s.latency_by_class[cls].started;
                ++s.latency_by_pool_class[pool_cls].started;
                lat_class[cls].push_back(lat);
                lat_pool_class[pool_cls].push_back(lat);
            }
            if (job.state == JobState::Completed) ++s.jobs_completed;
            if (job.state == JobState::Failed) ++s.jobs_failed;
        }
    }
    for (auto& [k, v] : lat_class) {
        s.latency_by_class[k].p50 = quantile(v, 0.50);
        s.latency_by_class[k].p95 = quantile(v, 0.95);
    }
    for (auto& [k, v] : lat_pool_class) {
        s.latency_by_pool_class[k].p50 = quantile(v, 0.50);
        s.latency_by_pool_class[k].p95 = quantile(v, 0.95);
    }
    s.failures = failure_counts;
    for (const char* reason : {"validation_gap", "pilot_preempted", "hibernation_timeout", "other"})
        s.failures.try_emplace(reason, 0);
    s.pilots_launched = pilots_launched;
    s.pilots_terminated = pilots_terminated;
    s.pilot_validation_failures = pilot_validation_failures;
    s.pilots_live_final = static_cast<std::int64_t>(pilots.size());
    for (const char* state : {"validating", "registered", "retiring"})
        s.pilots_by_state.try_emplace(state, 0);
    for (const auto& [id, p] : pilots) ++s.pilots_by_state[to_string(p.state)];
    s.pilots_by_state["terminated"] = pilots_terminated;
    for (const auto& [id, p] : pilots)
        wrapper_staleness_max =
            std::max(wrapper_staleness_max, frontend.wrapper_version - p.wrapper_version);
    s.wrapper_staleness_max = wrapper_staleness_max;
    return s;
}

RunResult World::finish() {
    metrics.summary = finalize_summary();
    RunResult r;
    r.metrics = std::move(metrics);
    r.trace = std::move(trace);
    for (const auto& [pid, pool] : pools) {
        for (const auto& [jid, job] : pool.jobs) {
            JobOutcome o;
            o.id = job.id;
            o.job_class = job.job_class;
            o.pool = pid;
            o.state = job.state;
            o.submit_time = job.submit_time;
            o.first_start_time = job.first_start_time;
            o.completion_time = job.completion_time;
            o.fail_reason = job.fail_reason;
            o.work_seconds = job.work_seconds;
            o.hibernation_timeouts = job.hibernation_timeouts;
            o.preemptions = job.preemptions;
            r.jobs.emplace(jid, std::move(o));
        }
    }
    for (const auto& [id, p] : pilots) {
        PilotOutcome o;
        o.id = p.id;
        o.machine_id = p.machine_id;
        o.model = p.model;
        o.state = p.state;
        o.wrapper_version = p.wrapper_version;
        o.launch_time = p.launch_time;
        r.live_pilots.push_back(std::move(o));
    }
    for (const auto& [id, m] : machines)
        if (!m.cvmfs_healthy) r.unhealthy_machines.push_back(id);
    r.frontend_wrapper_version = frontend.wrapper_version;
    return r;
}

RunResult run(const Scenario& scenario) {
    World w(scenario);
    w.run_loop();
    return w.finish();
}

RunResult run(const Scenario& scenario, std::uint64_t seed_override) {
    World w(scenario, seed_override);
    w.run_loop();
    return w.finish();
}

// ---------------------------------------------------------------------------
// Comparison runs
// ---------------------------------------------------------------------------

std::string ComparisonReport::to_json() const {
    using nlohmann::json;
    auto summary_json = [](const MetricsSummary& s) {
        json lat = json::object();
        for (const auto& [k, v] : s.latency_by_class)
            lat[k] = {{"submitted", v.submitted},
                      {"started", v.started},
                      {"p50", v.p50},
                      {"p95", v.p95}};
        json failures = json::object();
        for (const auto& [k, v] : s.failures) failures[k] = v;
        return json{{"scenario", s.scenario_name},
                    {"latency_by_class", lat},
                    {"failures", failures},
                    {"jobs_submitted", s.jobs_submitted},
                    {"jobs_completed", s.jobs_completed},
                    {"jobs_failed", s.jobs_failed}};
    };
    json delta = json::object();
    {
        json lat = json::object();
        for (const auto& [k, v] : summary_b.latency_by_class) {
            auto it = summary_a.latency_by_class.find(k);
            LatencyStats a = it == summary_a.latency_by_class.end() ? LatencyStats{} : it->second;
            lat[k] = {{"p50", v.p50 - a.p50}, {"p95", v.p95 - a.p95}};
        }
        json failures = json::object();
        for (const auto& [k, v] : summary_b.failures) {
            std::int64_t a = 0;
            if (auto it = summary_a.failures.find(k); it != summary_a.failures.end())
                a = it->second;
            failures[k] = v - a;
        }
        delta = {{"latency_by_class", lat}, {"failures", failures}};
    }
    json root{{"a", summary_json(summary_a)},
              {"b", summary_json(summary_b)},
              {"delta", delta},
              {"whole_slots", {{"time", sample_times}, {"a", whole_slots_a}, {"b", whole_slots_b}}}};
    return root.dump(2) + "\n";
}

ComparisonReport compare(const Scenario& a, const Scenario& b, std::uint64_t seed) {
    auto fut = std::async(std::launch::async, [&]() { return run(a, seed); });
    RunResult rb = run(b, seed);
    RunResult ra = fut.get();

    ComparisonReport rep;
    rep.scenario_a = a.name;
    rep.scenario_b = b.name;
    rep.summary_a = ra.metrics.summary;
    rep.summary_b = rb.metrics.summary;
    for (const auto& s : ra.metrics.samples) {
        rep.sample_times.push_back(s.time);
        rep.whole_slots_a.push_back(s.whole_slots);
    }
    for (const auto& s : rb.metrics.samples) rep.whole_slots_b.push_back(s.whole_slots);
    return rep;
}

} // namespace farmsim
