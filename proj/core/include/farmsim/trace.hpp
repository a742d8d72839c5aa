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
#include <string>
#include <vector>

#include "farmsim/job.hpp"
#include "farmsim/lhc.hpp"
#include "farmsim/provisioning.hpp"

namespace farmsim {

struct JobTransition {
    std::uint64_t ord = 0;
    double time = 0;
    std::string job_id;
    JobState from = JobState::Idle;
    JobState to = JobState::Idle;
    std::string machine_id;
    std::string reason;
};

struct PilotTransition {
    std::uint64_t ord = 0;
    double time = 0;
    std::string pilot_id;
    std::string machine_id;
    PilotModel model = PilotModel::VacuumGlidein;
    PilotState from = PilotState::Validating;
    PilotState to = PilotState::Validating;
    std::int64_t wrapper_version = 0;
    std::string reason;
};

struct DefragRecord {
    std::uint64_t ord = 0;
    double time = 0;
    std::string machine_id;
    bool drain = true;
    int whole_count = 0;
};

struct PhaseRecord {
    std::uint64_t ord = 0;
    double time = 0;
    Phase from = Phase::Interfill;
    Phase to = Phase::Interfill;
};

struct MigrationRecord {
    std::uint64_t ord = 0;
    double time = 0;
    std::string site;
    PoolId from = PoolId::GlobalPool;
    PoolId to = PoolId::CERNPool;
    std::size_t moved = 0;
};

// Full event-sourced record of a run; the csv form interleaves every record
// type in emission order.
struct Trace {
    std::vector<JobTransition> jobs;
    std::vector<PilotTransition> pilots;
    std::vector<DefragRecord> defrag;
    std::vector<PhaseRecord> phases;
    std::vector<MigrationRecord> migrations;

    std::uint64_t next_ord = 0;

    void job_event(double t, const std::string& id, JobState from, JobState to,
                   const std::string& machine, const std::string& reason);
    void pilot_event(double t, const Pilot& p, PilotState from, PilotState to,
                     const std::string& reason);
    void defrag_event(double t, const std::string& machine, bool drain, int whole_count);
    void phase_event(double t, Phase from, Phase to);
    void migration_event(double t, const std::string& site, PoolId from, PoolId to,
                         std::size_t moved);

    std::string to_csv() const;
    std::uint64_t digest() const; // FNV-1a over to_csv()
};

} // namespace farmsim
