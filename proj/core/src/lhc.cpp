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

#include "farmsim/lhc.hpp"

#include <algorithm>

#include "farmsim/rng.hpp"

namespace farmsim {

const char* to_string(Phase p) {
    switch (p) {
        case Phase::Fill: return "fill";
        case Phase::Interfill: return "interfill";
        case Phase::TechnicalStop: return "technical_stop";
    }
    return "?";
}

Phase phase_at(const std::vector<PhaseTransition>& transitions, double now) {
    if (transitions.empty() || now < transitions.front().time)
        throw SimError(ErrorKind::OutOfRange, "time precedes the schedule start");
    // boundary belongs to the new phase
    auto it = std::upper_bound(transitions.begin(), transitions.end(), now,
                               [](double t, const PhaseTransition& tr) { return t < tr.time; });
    return std::prev(it)->phase;
}

std::vector<PhaseTransition> materialize_schedule(const LHCSchedule& schedule, std::uint64_t seed,
                                                  double duration_s) {
    if (!schedule.generated) return schedule.transitions;

    const GeneratedSchedule& g = *schedule.generated;
    Rng rng(seed, "lhc");
    std::vector<PhaseTransition> out;
    double t = 0;
    Phase phase = g.first_phase;
    out.push_back({0, phase});
    while (t <= duration_s) {
        double mean = phase == Phase::Fill ? g.fill_mean_s : g.interfill_mean_s;
        double d = std::clamp(rng.exponential(mean), 0.5 * mean, 2.0 * mean);
        t += d;
        phase = phase == Phase::Fill ? Phase::Interfill : Phase::Fill;
        if (t <= duration_s) out.push_back({t, phase});
    }
    return out;
}

bool machine_available(AvailabilityClass availability, Phase phase) {
    if (availability == AvailabilityClass::Permanent) return true;
    return phase == Phase::Interfill || phase == Phase::TechnicalStop;
}

} // namespace farmsim
