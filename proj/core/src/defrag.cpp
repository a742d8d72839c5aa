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

#include "farmsim/defrag.hpp"

#include <algorithm>

#include "farmsim/engine.hpp"

namespace farmsim {

std::vector<DefragAction> defrag_cycle(World& w, double now) {
    const DefragConfig& cfg = w.scenario.defrag;
    std::vector<DefragAction> actions;
    if (!cfg.enabled) return actions;

    // Candidates are matchable pilots on available machines; retiring and
    // suspended pilots are already on their way out.
    std::vector<Pilot*> live;
    int draining = 0;
    for (auto& [id, p] : w.pilots) {
        if (p.pslot.draining) ++draining;
        if (p.state != PilotState::Registered || p.suspended) continue;
        if (!w.machines.at(p.machine_id).available) continue;
        live.push_back(&p);
    }

    int whole = 0;
    for (const Pilot* p : live)
        if (!p->pslot.draining && p->pslot.free_cores >= cfg.whole_threshold_cores) ++whole;

    if (whole >= cfg.whole_slot_target) {
        for (Pilot* p : live) {
            if (!p->pslot.draining) continue;
            p->pslot.draining = false;
            actions.push_back({p->machine_id, false, whole});
            w.trace.defrag_event(now, p->machine_id, false, whole);
        }
        return actions;
    }

    int budget = cfg.max_concurrent_draining - draining;
    if (budget <= 0) return actions;

    std::vector<Pilot*> cands;
    for (Pilot* p : live) {
        if (p->pslot.draining) continue;
        if (p->pslot.free_cores >= cfg.whole_threshold_cores) continue; // already whole
        if (p->pslot.total_cores < cfg.whole_threshold_cores) continue; // can never get whole
        cands.push_back(p);
    }
    std::sort(cands.begin(), cands.end(), [&](const Pilot* a, const Pilot* b) {
        if (cfg.rank == DefragRank::ClosestToWhole) {
            if (a->pslot.free_cores != b->pslot.free_cores)
                return a->pslot.free_cores > b->pslot.free_cores;
        } else { // MostFragmented: most dynamic slots first
            if (a->pslot.dynamic_slots.size() != b->pslot.dynamic_slots.size())
                return a->pslot.dynamic_slots.size() > b->pslot.dynamic_slots.size();
        }
        return a->machine_id < b->machine_id;
    });

    for (Pilot* p : cands) {
        if (budget <= 0) break;
        p->pslot.draining = true;
        --budget;
        actions.push_back({p->machine_id, true, whole});
        w.trace.defrag_event(now, p->machine_id, true, whole);
    }
    return actions;
}

} // namespace farmsim
