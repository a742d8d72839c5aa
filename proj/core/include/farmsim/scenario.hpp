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
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "farmsim/defrag.hpp"
#include "farmsim/job.hpp"
#include "farmsim/lhc.hpp"
#include "farmsim/pool.hpp"
#include "farmsim/provisioning.hpp"

namespace farmsim {

struct MachineGroup {
    std::string name_prefix = "m";
    int count = 1;
    int cores = 16;
    std::int64_t memory_mb = 32000;
    std::string site;
    AvailabilityClass availability = AvailabilityClass::Permanent;
};

struct ArrivalSpec {
    enum class Kind { Explicit, Poisson } kind = Kind::Explicit;
    std::vector<double> times_s;   // Explicit
    double rate_per_s = 0;         // Poisson
    double start_s = 0;
    double end_s = -1;             // -1: scenario duration
    std::int64_t max_count = 0;    // 0: unlimited
};

struct WorkSpec {
    enum class Kind { Fixed, ExponentialMean } kind = Kind::Fixed;
    double seconds = 3600;
};

struct JobStreamSpec {
    std::string name;
    PoolId pool = PoolId::GlobalPool;
    std::string schedd = "schedd";
    JobClass job_class = JobClass::Production;
    int cores = 1;
    std::int64_t memory_mb = 0;     // 0: cores * 2000
    std::string desired_sites;      // comma-separated; empty means unset
    std::string requirements;       // expression source; empty -> site-list guard
    ArrivalSpec arrivals;
    WorkSpec work;
};

struct FrontendSpec {
    std::int64_t initial_wrapper_version = 1;
    std::vector<double> reconfigure_times_s;
    std::vector<double> image_rebuild_times_s;
    double image_rebuild_delay_s = 604800; // coordination with the image owners
};

struct ProvisioningSpec {
    PilotModel model = PilotModel::VacuumGlidein;
    GlideinConfig glidein;
    std::string static_start_expr = "true";
    double launcher_interval_s = 300;
    double validation_retry_backoff_s = 1800;
    FrontendSpec frontend;
};

struct PoolSpec {
    PoolId id = PoolId::GlobalPool;
    NegotiatorConfig negotiator;
};

struct MigrationSpec {
    double time_s = 0;
    std::string site;
    PoolId from = PoolId::GlobalPool;
    PoolId to = PoolId::CERNPool;
};

struct Scenario {
    std::string name;
    std::uint64_t seed = 0;
    double duration_s = 86400;
    double metrics_interval_s = 300;
    std::vector<MachineGroup> machines;
    double unhealthy_fraction = 0;
    ProvisioningSpec provisioning;
    std::vector<PoolSpec> pools;
    std::map<std::string, PoolId> site_pools; // registration routing; default: first pool
    std::vector<MigrationSpec> migrations;
    LHCSchedule lhc;
    DefragConfig defrag;
    std::vector<JobStreamSpec> workload;
};

// Collects every violation; throws ScenarioValidationError when non-empty.
void validate_scenario(const Scenario& s);
std::vector<std::string> scenario_violations(const Scenario& s);

// Deterministic arrival times for one stream (label-derived rng stream).
std::vector<double> arrival_stream(const ArrivalSpec& spec, std::uint64_t seed,
                                   const std::string& stream_name, double scenario_duration_s);

} // namespace farmsim
