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

#include <cstdint>
#include <optional>
#include <string>

#include "farmsim/expr.hpp"

namespace farmsim {

enum class JobClass { Tier0, Production, Analysis };
enum class JobState { Idle, Running, Suspended, Completed, Failed, Removed };
enum class FailReason { ValidationGap, PilotPreempted, HibernationTimeout, Other };

const char* to_string(JobClass c);
const char* to_string(JobState s);
const char* to_string(FailReason r);

struct JobAd {
    std::string id;
    JobClass job_class = JobClass::Production;
    int request_cores = 1;
    std::int64_t request_memory_mb = 2000;
    double work_seconds = 0;      // full service demand
    double remaining_seconds = 0; // what is left; reset to work_seconds on requeue
    expr::AttributeSet attributes;
    expr::ExprPtr requirements;

    // Jobs with equal keys are interchangeable for matchmaking; the
    // negotiator evaluates each (cluster, slot) pair once per cycle.
    std::string autocluster;

    JobState state = JobState::Idle;
    std::string schedd;
    double submit_time = 0;
    std::optional<double> first_start_time;
    std::optional<double> start_time; // most recent dispatch
    std::optional<double> suspend_time;
    std::optional<double> completion_time;
    std::optional<FailReason> fail_reason;
    double last_dispatch_time = 0;
    int hibernation_timeouts = 0;
    int preemptions = 0;
    std::uint64_t epoch = 0; // bumps on every dispatch/suspend, invalidating stale events

    // current claim; empty when not Running/Suspended
    std::string machine_id;
    std::string pilot_id;
    std::string dyn_slot_id;

    bool claimed() const { return !dyn_slot_id.empty(); }
};

} // namespace farmsim
