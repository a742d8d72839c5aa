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
#include "farmsim/slots.hpp"

namespace farmsim {

enum class PilotModel { StaticStartd, VacuumGlidein };
enum class PilotState { Validating, Registered, Retiring, Terminated };
enum class PoolId { GlobalPool, CERNPool };

const char* to_string(PilotModel m);
const char* to_string(PilotState s);
const char* to_string(PoolId p);

// START expression published on slots at the isolated production site:
// anything may run on other sites, but a slot at that site only accepts
// jobs carrying a workload-agent name (production and reconstruction
// traffic; analysis jobs carry none).
inline constexpr const char* kProductionOnlyStartExpr =
    "(GLIDEIN_CMSSite =!= \"T2_CH_CERN_P5\" || WMAgent_AgentName =!= UNDEFINED)";

// Requirements expression injected into every job: match a slot only when
// the job's site list contains the slot's site; undefined when the job has
// no site list.
inline constexpr const char* kSiteListRequirementsExpr =
    "ifthenelse(DESIRED_Sites is not undefined, "
    "stringListMember(GLIDEIN_CMSSite, DESIRED_Sites), undefined)";

struct CpuPolicy {
    bool whole_node = true;
    int fixed = 0; // used when !whole_node
};

struct GlideinConfig {
    double max_idle_s = 3600;
    double max_walltime_s = 172800; // ~48 h
    CpuPolicy cpus;
    double retire_grace_s = 3600;
    std::string start_expr_source = kProductionOnlyStartExpr;
    expr::ExprPtr start_expr; // parsed form of start_expr_source
};

// Publishes pilot configuration and the wrapper script version.  Reconfiguring
// bumps the version; running pilots keep whatever they launched with.
struct Frontend {
    std::int64_t wrapper_version = 1;
    GlideinConfig published_config;

    void reconfigure() { ++wrapper_version; }
};

struct Pilot {
    std::string id;
    std::string machine_id;
    PilotModel model = PilotModel::VacuumGlidein;
    std::int64_t wrapper_version = 1;
    PilotState state = PilotState::Validating;
    double launch_time = 0;
    std::optional<double> idle_since;
    double retire_start = 0;
    bool suspended = false;
    PoolId pool = PoolId::GlobalPool;
    GlideinConfig config; // snapshot at launch (vacuum) or image build (static)
    PartitionableSlot pslot;

    bool live() const { return state != PilotState::Terminated; }
    bool accepts_matches() const {
        return state == PilotState::Registered && !suspended && !pslot.draining;
    }
};

} // namespace farmsim
