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

#pragma once

#include <array>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "farmsim/expr.hpp"
#include "farmsim/job.hpp"
#include "farmsim/provisioning.hpp"

namespace farmsim {

enum class PackPolicy { BestFit, WorstFit, FirstFit };

const char* to_string(PackPolicy p);

struct NegotiatorConfig {
    double cycle_interval_s = 60;
    std::array<JobClass, 3> class_priority_order{JobClass::Tier0, JobClass::Production,
                                                 JobClass::Analysis};
    PackPolicy pack_policy = PackPolicy::BestFit;
    double max_hibernation_s = 86400; // suspended claims survive this long
};

// What a registered pilot advertises to its pool.
struct SlotAd {
    std::string pilot_id;
    std::string machine_id;
    std::string site;
    expr::ExprPtr start;
    expr::AttributeSet attributes;
};

// Collector + negotiator + schedd queues for one pool.  A slot ad lives in
// exactly one pool at a time.
struct Pool {
    PoolId id = PoolId::GlobalPool;
    NegotiatorConfig negotiator;
    std::map<std::string, SlotAd> slot_ads; // keyed by pilot id
    std::map<std::string, JobAd> jobs;      // keyed by job id

    // Idle jobs ordered by (class priority, submit time, id); the rank is
    // frozen from negotiator.class_priority_order at insert time.
    struct IdleKey {
        int class_rank;
        double submit_time;
        std::string id;
        bool operator<(const IdleKey& o) const {
            if (class_rank != o.class_rank) return class_rank < o.class_rank;
            if (submit_time != o.submit_time) return submit_time < o.submit_time;
            return id < o.id;
        }
    };
    std::set<IdleKey> idle_queue;

    int class_rank(JobClass c) const {
        for (std::size_t i = 0; i < negotiator.class_priority_order.size(); ++i)
            if (negotiator.class_priority_order[i] == c) return static_cast<int>(i);
        return 3;
    }
};

struct Placement {
    std::string job_id;
    std::string machine_id;
    std::string dyn_slot_id;
};

struct World;

// --- pool operations (single-threaded, driven by the event loop) ---

// Enqueues an idle job; throws SimError(DuplicateId).
std::string submit(World& world, PoolId pool, const std::string& schedd, JobAd job, double now);

// One matchmaking pass: idle jobs in class-priority order, FIFO within a
// class; slots chosen by the pack policy with lexicographic machine-id
// tie-breaks; unplaceable jobs stay idle without blocking later ones.
std::vector<Placement> negotiation_cycle(World& world, PoolId pool, double now);

void complete_job(World& world, const std::string& job_id, double now);
void fail_job(World& world, const std::string& job_id, FailReason reason, double now);

// Running -> Suspended, preserving remaining work and keeping the claim.
void suspend_job(World& world, const std::string& job_id, double now);

// Suspended -> Running on the original slot when the hibernation window has
// not elapsed; otherwise Suspended -> Idle with work reset to the full
// original demand.
JobState resume_or_requeue(World& world, const std::string& job_id, double now);

// Preemption/timeout requeue: back to Idle, work reset, claim released.
void requeue_job(World& world, const std::string& job_id, FailReason reason, double now);

// Moves every slot ad of `site` and redirects future registrations.
std::size_t migrate_site(World& world, PoolId from, PoolId to, const std::string& site);

} // namespace farmsim
