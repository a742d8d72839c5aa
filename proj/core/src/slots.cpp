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

#include "farmsim/slots.hpp"

#include <algorithm>

namespace farmsim {

PartitionableSlot make_pslot(const Machine& m, std::string id_prefix, int cores_limit) {
    PartitionableSlot p;
    p.machine_id = m.id;
    p.id_prefix = std::move(id_prefix);
    p.total_cores = cores_limit > 0 ? std::min(cores_limit, m.total_cores) : m.total_cores;
    // memory scales with the share of cores taken by the pslot
    p.total_memory_mb =
        cores_limit > 0 ? m.memory_mb * p.total_cores / m.total_cores : m.memory_mb;
    p.free_cores = p.total_cores;
    p.free_memory_mb = p.total_memory_mb;
    return p;
}

bool can_carve(const PartitionableSlot& p, int cores, std::int64_t memory_mb) {
    return !p.draining && cores >= 1 && cores <= p.free_cores && memory_mb >= 0 &&
           memory_mb <= p.free_memory_mb;
}

DynamicSlot& carve(PartitionableSlot& p, int cores, std::int64_t memory_mb) {
    if (p.draining)
        throw SimError(ErrorKind::Draining, "pslot on " + p.machine_id + " is draining");
    if (cores < 1 || cores > p.free_cores || memory_mb < 0 || memory_mb > p.free_memory_mb)
        throw SimError(ErrorKind::InsufficientResources,
                       "request " + std::to_string(cores) + "c/" + std::to_string(memory_mb) +
                           "mb exceeds free " + std::to_string(p.free_cores) + "c/" +
                           std::to_string(p.free_memory_mb) + "mb on " + p.machine_id);
    DynamicSlot d;
    d.id = p.id_prefix + "/d" + std::to_string(p.next_dyn_seq++);
    d.cores = cores;
    d.memory_mb = memory_mb;
    p.free_cores -= cores;
    p.free_memory_mb -= memory_mb;
    p.dynamic_slots.push_back(std::move(d));
    return p.dynamic_slots.back();
}

void release(PartitionableSlot& p, std::string_view dynamic_slot_id) {
    auto it = std::find_if(p.dynamic_slots.begin(), p.dynamic_slots.end(),
                           [&](const DynamicSlot& d) { return d.id == dynamic_slot_id; });
    if (it == p.dynamic_slots.end())
        throw SimError(ErrorKind::UnknownSlot,
                       "no dynamic slot '" + std::string(dynamic_slot_id) + "' on " + p.machine_id);
    p.free_cores += it->cores;
    p.free_memory_mb += it->memory_mb;
    p.dynamic_slots.erase(it);
}

DynamicSlot* find_dynamic_slot(PartitionableSlot& p, std::string_view dynamic_slot_id) {
    auto it = std::find_if(p.dynamic_slots.begin(), p.dynamic_slots.end(),
                           [&](const DynamicSlot& d) { return d.id == dynamic_slot_id; });
    return it == p.dynamic_slots.end() ? nullptr : &*it;
}

int whole_machine_count(const std::vector<const PartitionableSlot*>& slots, int threshold_cores) {
    int n = 0;
    for (const auto* p : slots)
        if (p && !p->draining && p->free_cores >= threshold_cores) ++n;
    return n;
}

bool conserves(const PartitionableSlot& p) {
    int cores = p.free_cores;
    std::int64_t mem = p.free_memory_mb;
    for (const auto& d : p.dynamic_slots) {
        cores += d.cores;
        mem += d.memory_mb;
    }
    return cores == p.total_cores && mem == p.total_memory_mb && p.free_cores >= 0 &&
           p.free_memory_mb >= 0;
}

} // namespace farmsim
