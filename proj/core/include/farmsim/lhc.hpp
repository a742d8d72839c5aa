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
#include <vector>

#include "farmsim/slots.hpp"

namespace farmsim {

// Accelerator operating phases driving machine availability: opportunistic
// machines serve batch work only while no beam is being delivered.
enum class Phase { Fill, Interfill, TechnicalStop };

const char* to_string(Phase p);

struct PhaseTransition {
    double time = 0;
    Phase phase = Phase::Interfill;
};

struct GeneratedSchedule {
    Phase first_phase = Phase::Interfill;
    double fill_mean_s = 28800;
    double interfill_mean_s = 10800;
};

// Either an explicit transition list or a seeded generator.
struct LHCSchedule {
    std::vector<PhaseTransition> transitions; // used when no generator
    std::optional<GeneratedSchedule> generated;
};

// Phase in effect at `now` (a transition boundary belongs to the new
// phase).  Throws SimError(OutOfRange) before the first transition.
Phase phase_at(const std::vector<PhaseTransition>& transitions, double now);

// Expands a schedule into a concrete transition list covering [0, duration].
// Generated phases alternate, with exponential durations truncated to
// [0.5x, 2x] of the mean; deterministic for a given seed.
std::vector<PhaseTransition> materialize_schedule(const LHCSchedule& schedule, std::uint64_t seed,
                                                  double duration_s);

// Permanent machines are available in every phase; opportunistic ones only
// while the accelerator is not filling.
bool machine_available(AvailabilityClass availability, Phase phase);

} // namespace farmsim
