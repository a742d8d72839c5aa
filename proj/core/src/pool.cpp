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

#include "farmsim/pool.hpp"

#include <algorithm>

#include "farmsim/engine.hpp"

namespace farmsim {

const char* to_string(PackPolicy p) {
    switch (p) {
        case PackPolicy::BestFit: return "best_fit";
        case PackPolicy::WorstFit: return "worst_fit";
        case PackPolicy::FirstFit: return "first_fit";
    }
    return "?";
}

namespace {

JobAd& get_job(World& w, const std::string& job_id) {
    for (auto& [pid, pool] : w.pools) {
        auto it = pool.jobs.find(job_id);
        if (it != pool.jobs.end()) return it->second;
    }
    throw SimError(ErrorKind::UnknownSlot, "no such job: " + job_id);
}

Pool& owning_pool(World& w, const JobAd& job) {
    for (auto& [pid, pool] : w.pools)
        if (pool.jobs.count(job.id)) return pool;
    throw SimError(ErrorKind::UnknownSlot, "job not owned by any pool: " + job.id);
}

void release_claim(World& w, JobAd& job) {
    if (!job.claimed()) return;
    auto it = w.pilots.find(job.pilot_id);
    if (it != w.pilots.end()) {
        release(it->second.pslot, job.dyn_slot_id);
        --w.claims;
        w.after_release(it->second);
    }
    job.machine_id.clear();
    job.pilot_id.clear();
    job.dyn_slot_id.clear();
}

void start_job(World& w, Pool& pool, JobAd& job, Pilot& pilot, double now) {
    DynamicSlot& d = carve(pilot.pslot, job.request_cores, job.request_memory_mb);
    d.claimed_job = job.id;
    ++w.claims;

    job.state = JobState::Running;
    job.start_time = now;
    if (!job.first_start_time) job.first_start_time = now;
    job.last_dispatch_time = now;
    job.machine_id = pilot.machine_id;
    job.pilot_id = pilot.id;
    job.dyn_slot_id = d.id;
    ++job.epoch;
    ++w.jobs_running;

    pilot.idle_since.reset(); // occupancy stops the idle clock

    w.schedule_job_completion(job);
    w.trace.job_event(now, job.id, JobState::Idle, JobState::Running, pilot.machine_id, "match");
    (void)pool;
}

} // namespace

std::string autocluster_key(const JobAd& job) {
    std::string key = expr::pretty_print(job.requirements);
    key += '\x1f';
    for (const auto& [name, value] : job.attributes.items()) {
        key += expr::ascii_lower(name);
        key += '=';
        key += expr::pretty_print(value);
        key += ';';
    }
    return key;
}

std::string submit(World& w, PoolId pool_id, const std::string& schedd, JobAd job, double now) {
    Pool& pool = w.pool(pool_id);
    if (pool.jobs.count(job.id))
        throw SimError(ErrorKind::DuplicateId, "duplicate job id: " + job.id);
    if (job.state != JobState::Idle)
        throw SimError(ErrorKind::InvalidTransition, "submit requires an idle job: " + job.id);

    job.autocluster = autocluster_key(job);
    job.schedd = schedd;
    job.submit_time = now;
    job.remaining_seconds = job.work_seconds;
    std::string id = job.id;
    int rank = pool.class_rank(job.job_class);
    ++w.idle_count[static_cast<int>(job.job_class)];
    pool.jobs.emplace(id, std::move(job));
    pool.idle_queue.insert({rank, now, id});
    w.trace.job_event(now, id, JobState::Idle, JobState::Idle, "", "submit");
    return id;
}

std::vector<Placement> negotiation_cycle(World& w, PoolId pool_id, double now) {
    Pool& pool = w.pool(pool_id);
    std::vector<Placement> placed;

    struct Candidate {
        Pilot* pilot;
        const SlotAd* ad;
    };
    std::vector<Candidate> cands;
    cands.reserve(pool.slot_ads.size());
    for (auto& [pilot_id, ad] : pool.slot_ads) {
        auto it = w.pilots.find(pilot_id);
        if (it == w.pilots.end()) continue;
        Pilot& p = it->second;
        if (!p.accepts_matches()) continue;
        const Machine& m = w.machines.at(p.machine_id);
        if (!m.available) continue;
        cands.push_back({&p, &ad});
    }
    std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
        return a.pilot->machine_id < b.pilot->machine_id;
    });

    auto max_free = [&]() {
        int mf = 0;
        for (const auto& c : cands) mf = std::max(mf, c.pilot->pslot.free_cores);
        return mf;
    };
    int free_high_water = max_free();

    // one match evaluation per (autocluster, slot) pair per cycle
    std::map<std::string_view, std::vector<signed char>> match_cache;
    auto cached_match = [&](const JobAd& job, std::size_t ci) {
        auto [it, inserted] = match_cache.try_emplace(job.autocluster);
        if (inserted) it->second.assign(cands.size(), -1);
        signed char& slot = it->second[ci];
        if (slot < 0)
            slot = matches(job.requirements, cands[ci].ad->start, job.attributes,
                           cands[ci].ad->attributes)
                       ? 1
                       : 0;
        return slot == 1;
    };

    // Scan in (class priority, submit fifo) order; jobs that do not fit are
    // skipped without blocking anything behind them.
    for (auto it = pool.idle_queue.begin(); it != pool.idle_queue.end();) {
        if (free_high_water <= 0) break;
        JobAd& job = pool.jobs.at(it->id);
        if (job.request_cores > free_high_water) {
            ++it;
            continue;
        }
        Candidate* chosen = nullptr;
        for (std::size_t ci = 0; ci < cands.size(); ++ci) {
            Candidate& c = cands[ci];
            if (!can_carve(c.pilot->pslot, job.request_cores, job.request_memory_mb)) continue;
            if (!cached_match(job, ci)) continue;
            if (!chosen) {
                chosen = &c;
                if (pool.negotiator.pack_policy == PackPolicy::FirstFit) break;
                continue;
            }
            if (pool.negotiator.pack_policy == PackPolicy::BestFit) {
                if (c.pilot->pslot.free_cores < chosen->pilot->pslot.free_cores) chosen = &c;
            } else if (pool.negotiator.pack_policy == PackPolicy::WorstFit) {
                if (c.pilot->pslot.free_cores > chosen->pilot->pslot.free_cores) chosen = &c;
            }
        }
        if (!chosen) {
            ++it;
            continue;
        }
        start_job(w, pool, job, *chosen->pilot, now);
        --w.idle_count[static_cast<int>(job.job_class)];
        placed.push_back({job.id, chosen->pilot->machine_id, job.dyn_slot_id});
        it = pool.idle_queue.erase(it);
        free_high_water = max_free();
    }
    return placed;
}

void complete_job(World& w, const std::string& job_id, double now) {
    JobAd& job = get_job(w, job_id);
    if (job.state != JobState::Running)
        throw SimError(ErrorKind::InvalidTransition,
                       "complete requires a running job: " + job_id);
    std::string machine = job.machine_id;
    release_claim(w, job);
    --w.jobs_running;
    job.state = JobState::Completed;
    job.completion_time = now;
    job.remaining_seconds = 0;
    w.trace.job_event(now, job.id, JobState::Running, JobState::Completed, machine, "done");
}

void fail_job(World& w, const std::string& job_id, FailReason reason, double now) {
    JobAd& job = get_job(w, job_id);
    if (job.state != JobState::Running)
        throw SimError(ErrorKind::InvalidTransition, "fail requires a running job: " + job_id);
    std::string machine = job.machine_id;
    release_claim(w, job);
    --w.jobs_running;
    job.state = JobState::Failed;
    job.completion_time = now;
    job.fail_reason = reason;
    ++w.failure_counts[to_string(reason)];
    w.trace.job_event(now, job.id, JobState::Running, JobState::Failed, machine,
                      to_string(reason));
}

void suspend_job(World& w, const std::string& job_id, double now) {
    JobAd& job = get_job(w, job_id);
    if (job.state != JobState::Running)
        throw SimError(ErrorKind::InvalidTransition, "suspend requires a running job: " + job_id);
    job.remaining_seconds -= now - job.last_dispatch_time;
    if (job.remaining_seconds < 0) job.remaining_seconds = 0;
    job.suspend_time = now;
    job.state = JobState::Suspended;
    ++job.epoch; // cancels the scheduled completion
    --w.jobs_running;
    ++w.jobs_suspended;
    w.trace.job_event(now, job.id, JobState::Running, JobState::Suspended, job.machine_id,
                      "suspend");
}

JobState resume_or_requeue(World& w, const std::string& job_id, double now) {
    JobAd& job = get_job(w, job_id);
    if (job.state != JobState::Suspended)
        throw SimError(ErrorKind::InvalidTransition,
                       "resume requires a suspended job: " + job_id);
    Pool& pool = owning_pool(w, job);
    double hibernated = now - job.suspend_time.value_or(now);
    if (hibernated <= pool.negotiator.max_hibernation_s) {
        // resume on the original slot with remaining work intact
        job.state = JobState::Running;
        job.start_time = now;
        job.last_dispatch_time = now;
        job.suspend_time.reset();
        ++job.epoch;
        --w.jobs_suspended;
        ++w.jobs_running;
        w.schedule_job_completion(job);
        w.trace.job_event(now, job.id, JobState::Suspended, JobState::Running, job.machine_id,
                          "resume");
        return JobState::Running;
    }
    ++job.hibernation_timeouts;
    requeue_job(w, job_id, FailReason::HibernationTimeout, now);
    return JobState::Idle;
}

void requeue_job(World& w, const std::string& job_id, FailReason reason, double now) {
    JobAd& job = get_job(w, job_id);
    if (job.state != JobState::Running && job.state != JobState::Suspended)
        throw SimError(ErrorKind::InvalidTransition,
                       "requeue requires a running or suspended job: " + job_id);
    JobState from = job.state;
    std::string machine = job.machine_id;
    if (from == JobState::Running)
        --w.jobs_running;
    else
        --w.jobs_suspended;
    release_claim(w, job);

    // restart from zero: progress is only preserved across suspend/resume
    job.state = JobState::Idle;
    job.remaining_seconds = job.work_seconds;
    job.suspend_time.reset();
    job.start_time.reset();
    ++job.epoch;
    if (reason == FailReason::PilotPreempted) ++job.preemptions;
    ++w.failure_counts[to_string(reason)];

    Pool& pool = owning_pool(w, job);
    ++w.idle_count[static_cast<int>(job.job_class)];
    pool.idle_queue.insert({pool.class_rank(job.job_class), job.submit_time, job.id});
    w.trace.job_event(now, job.id, from, JobState::Idle, machine, to_string(reason));
}

std::size_t migrate_site(World& w, PoolId from, PoolId to, const std::string& site) {
    if (from == to)
        throw SimError(ErrorKind::InvalidTransition, "migrate_site needs two distinct pools");
    Pool& src = w.pool(from);
    Pool& dst = w.pool(to);

    std::vector<std::string> moving;
    for (const auto& [pilot_id, ad] : src.slot_ads)
        if (ad.site == site) moving.push_back(pilot_id);
    for (const auto& pilot_id : moving) {
        auto node = src.slot_ads.extract(pilot_id);
        dst.slot_ads.insert(std::move(node));
        auto it = w.pilots.find(pilot_id);
        if (it != w.pilots.end()) it->second.pool = to;
    }
    w.site_pool[site] = to; // future registrations follow the site
    w.trace.migration_event(w.now, site, from, to, moving.size());
    return moving.size();
}

} // namespace farmsim
