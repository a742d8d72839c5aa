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

#include "farmsim/scenario_io.hpp"

#include <map>

#include "farmsim/errors.hpp"

namespace farmsim {

namespace {

const char* const k_hlt_run2_static = R"json({
  "name": "hlt_run2_static",
  "seed": 42,
  "duration_s": 604800,
  "metrics_interval_s": 300,
  "machines": [
    {
      "name_prefix": "hlt-",
      "count": 100,
      "cores": 16,
      "memory_mb": 32000,
      "site": "T2_CH_CERN_HLT",
      "availability": "permanent"
    }
  ],
  "unhealthy_fraction": 0.0,
  "provisioning": {
    "model": "static_startd",
    "static_start_expr": "true",
    "launcher_interval_s": 300,
    "wrapper_version": 1
  },
  "pools": [
    {
      "id": "global",
      "cycle_interval_s": 60,
      "class_priority": ["tier0", "production", "analysis"],
      "pack_policy": "best_fit",
      "max_hibernation_s": 86400
    }
  ],
  "defrag": {
    "enabled": true,
    "interval_s": 600,
    "max_concurrent_draining": 2,
    "whole_slot_target": 4,
    "whole_threshold_cores": 8,
    "rank": "closest_to_whole"
  },
  "workload": [
    {
      "name": "t0reco",
      "pool": "global",
      "schedd": "t0",
      "class": "tier0",
      "cores": 8,
      "memory_mb": 16000,
      "desired_sites": "T2_CH_CERN_HLT",
      "arrivals": { "poisson_rate_per_s": 0.0005 },
      "work": { "exponential_mean_s": 7200 }
    },
    {
      "name": "prod",
      "pool": "global",
      "schedd": "wma1",
      "class": "production",
      "cores": 1,
      "memory_mb": 2000,
      "desired_sites": "T2_CH_CERN_HLT",
      "arrivals": { "poisson_rate_per_s": 0.05 },
      "work": { "exponential_mean_s": 21600 }
    },
    {
      "name": "ana",
      "pool": "global",
      "schedd": "crab",
      "class": "analysis",
      "cores": 1,
      "memory_mb": 2000,
      "desired_sites": "T2_CH_CERN_HLT",
      "arrivals": { "poisson_rate_per_s": 0.00025 },
      "work": { "exponential_mean_s": 10800 }
    }
  ]
}
)json";

const char* const k_p5_vacuum = R"json({
  "name": "p5_vacuum",
  "seed": 42,
  "duration_s": 604800,
  "metrics_interval_s": 300,
  "machines": [
    {
      "name_prefix": "p5-",
      "count": 100,
      "cores": 16,
      "memory_mb": 32000,
      "site": "T2_CH_CERN_P5",
      "availability": "permanent"
    }
  ],
  "unhealthy_fraction": 0.0,
  "provisioning": {
    "model": "vacuum_glidein",
    "glidein": {
      "max_idle_s": 3600,
      "max_walltime_s": 172800,
      "cpus": "whole_node",
      "retire_grace_s": 3600
    },
    "launcher_interval_s": 300,
    "validation_retry_backoff_s": 1800,
    "wrapper_version": 1
  },
  "pools": [
    {
      "id": "cern",
      "cycle_interval_s": 60,
      "class_priority": ["tier0", "production", "analysis"],
      "pack_policy": "best_fit",
      "max_hibernation_s": 86400
    }
  ],
  "site_pools": { "T2_CH_CERN_P5": "cern" },
  "workload": [
    {
      "name": "t0reco",
      "pool": "cern",
      "schedd": "t0",
      "class": "tier0",
      "cores": 8,
      "memory_mb": 16000,
      "desired_sites": "T2_CH_CERN_P5",
      "arrivals": { "poisson_rate_per_s": 0.0005 },
      "work": { "exponential_mean_s": 7200 }
    },
    {
      "name": "prod",
      "pool": "cern",
      "schedd": "wma1",
      "class": "production",
      "cores": 1,
      "memory_mb": 2000,
      "desired_sites": "T2_CH_CERN_P5",
      "arrivals": { "poisson_rate_per_s": 0.05 },
      "work": { "exponential_mean_s": 21600 }
    },
    {
      "name": "ana",
      "pool": "cern",
      "schedd": "crab",
      "class": "analysis",
      "cores": 1,
      "memory_mb": 2000,
      "desired_sites": "T2_CH_CERN_P5",
      "arrivals": { "poisson_rate_per_s": 0.00025 },
      "work": { "exponential_mean_s": 10800 }
    }
  ]
}
)json";

const char* const k_t0_commissioning = R"json({
  "name": "t0_commissioning",
  "seed": 42,
  "duration_s": 604800,
  "metrics_interval_s": 300,
  "machines": [
    {
      "name_prefix": "hlt-",
      "count": 100,
      "cores": 16,
      "memory_mb": 32000,
      "site": "T2_CH_CERN_HLT",
      "availability": "permanent"
    }
  ],
  "unhealthy_fraction": 0.0,
  "provisioning": {
    "model": "static_startd",
    "static_start_expr": "true",
    "launcher_interval_s": 300,
    "wrapper_version": 1
  },
  "pools": [
    {
      "id": "global",
      "cycle_interval_s": 60,
      "class_priority": ["tier0", "production", "analysis"],
      "pack_policy": "best_fit",
      "max_hibernation_s": 86400
    }
  ],
  "defrag": {
    "enabled": true,
    "interval_s": 600,
    "max_concurrent_draining": 2,
    "whole_slot_target": 4,
    "whole_threshold_cores": 8,
    "rank": "closest_to_whole"
  },
  "workload": [
    {
      "name": "promptreco",
      "pool": "global",
      "schedd": "t0",
      "class": "tier0",
      "cores": 8,
      "memory_mb": 16000,
      "desired_sites": "T2_CH_CERN_HLT",
      "arrivals": {
        "times_s": [86400, 87000, 87600, 88200, 88800, 89400, 90000, 90600, 91200, 91800, 92400, 93000]
      },
      "work": { "fixed_s": 14400 }
    },
    {
      "name": "prod1c",
      "pool": "global",
      "schedd": "wma1",
      "class": "production",
      "cores": 1,
      "memory_mb": 2000,
      "desired_sites": "T2_CH_CERN_HLT",
      "arrivals": { "poisson_rate_per_s": 0.07 },
      "work": { "exponential_mean_s": 43200 }
    }
  ]
}
)json";

const char* const k_interfill_opportunistic = R"json({
  "name": "interfill_opportunistic",
  "seed": 42,
  "duration_s": 604800,
  "metrics_interval_s": 300,
  "machines": [
    {
      "name_prefix": "hlt3-",
      "count": 100,
      "cores": 16,
      "memory_mb": 32000,
      "site": "T2_CH_CERN_HLT",
      "availability": "opportunistic"
    }
  ],
  "unhealthy_fraction": 0.0,
  "provisioning": {
    "model": "vacuum_glidein",
    "glidein": {
      "max_idle_s": 3600,
      "max_walltime_s": 172800,
      "cpus": "whole_node",
      "retire_grace_s": 3600
    },
    "launcher_interval_s": 300,
    "validation_retry_backoff_s": 1800,
    "wrapper_version": 1
  },
  "pools": [
    {
      "id": "global",
      "cycle_interval_s": 60,
      "class_priority": ["tier0", "production", "analysis"],
      "pack_policy": "best_fit",
      "max_hibernation_s": 86400
    }
  ],
  "lhc": {
    "generated": {
      "first_phase": "interfill",
      "fill_mean_s": 28800,
      "interfill_mean_s": 10800
    }
  },
  "workload": [
    {
      "name": "t0spill",
      "pool": "global",
      "schedd": "t0",
      "class": "tier0",
      "cores": 8,
      "memory_mb": 16000,
      "desired_sites": "T2_CH_CERN_HLT",
      "arrivals": { "poisson_rate_per_s": 0.0005 },
      "work": { "exponential_mean_s": 7200 }
    },
    {
      "name": "prodfill",
      "pool": "global",
      "schedd": "wma1",
      "class": "production",
      "cores": 1,
      "memory_mb": 2000,
      "desired_sites": "T2_CH_CERN_HLT",
      "arrivals": { "poisson_rate_per_s": 0.033 },
      "work": { "exponential_mean_s": 14400 }
    }
  ]
}
)json";

const std::map<std::string, const char*>& preset_map() {
    static const std::map<std::string, const char*> presets = {
        {"hlt_run2_static", k_hlt_run2_static},
        {"p5_vacuum", k_p5_vacuum},
        {"t0_commissioning", k_t0_commissioning},
        {"interfill_opportunistic", k_interfill_opportunistic},
    };
    return presets;
}

} // namespace

std::vector<std::string> preset_names() {
    std::vector<std::string> out;
    for (const auto& [name, text] : preset_map()) out.push_back(name);
    return out;
}

bool is_preset(const std::string& name) { return preset_map().count(name) > 0; }

const std::string& preset_json(const std::string& name) {
    static std::map<std::string, std::string> cache;
    auto it = preset_map().find(name);
    if (it == preset_map().end())
        throw SimError(ErrorKind::IoError, "unknown preset '" + name + "'");
    return cache.emplace(name, it->second).first->second;
}

} // namespace farmsim
