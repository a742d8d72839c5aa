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

#include <string>
#include <vector>

namespace farmsim {

enum class DefragRank { ClosestToWhole, MostFragmented };

// Induced-defragmentation daemon: drains fragmented pslots by attrition
// (never preempting) until enough whole slots exist for multicore jobs.
struct DefragConfig {
    bool enabled = false;
    double interval_s = 600;
    int max_concurrent_draining = 2;
    int whole_slot_target = 4;
    int whole_threshold_cores = 8;
    DefragRank rank = DefragRank::ClosestToWhole;
};

struct DefragAction {
    std::string machine_id;
    bool drain = true; // false: undrain
    int whole_count = 0;
};

struct World;

// One daemon pass: undrains everything once the whole-slot target is met,
// otherwise starts draining the best-ranked fragmented pslots subject to
// the concurrency cap.  Draining pslots receive no new matches; a pslot
// whose last dynamic slot releases is undrained automatically (that hook
// lives in the engine's release path).
std::vector<DefragAction> defrag_cycle(World& world, double now);

} // namespace farmsim
