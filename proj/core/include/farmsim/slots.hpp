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
#include <string_view>
#include <vector>

#include "farmsim/errors.hpp"

namespace farmsim {

enum class AvailabilityClass { Permanent, Opportunistic };

// A physical host.  Runtime fields (availability, validation backoff, the
// id of the pilot currently occupying it) are owned by the single-threaded
// simulation loop.
struct Machine {
    std::string id;
    int total_cores = 16;
    std::int64_t memory_mb = 32000;
    std::string site;
    bool cvmfs_healthy = true;
    AvailabilityClass availability = AvailabilityClass::Permanent;

    // simulation state
    bool available = true;
    double retry_after = 0;    // no pilot launch before this time (validation backoff)
    std::string live_pilot;    // empty when no non-terminated pilot is hosted
    int pilot_seq = 0;
};

struct DynamicSlot {
    std::string id;
    int cores = 0;
    std::int64_t memory_mb = 0;
    std::optional<std::string> claimed_job;
};

// Machine-wide slot from which per-job dynamic slots are carved.
// Invariant: free_cores + sum(dynamic cores) == total_cores, and the same
// for memory, at all times.
struct PartitionableSlot {
    std::string machine_id;
    std::string id_prefix; // dynamic slot ids are "<prefix>/d<N>"
    int total_cores = 0;
    std::int64_t total_memory_mb = 0;
    int free_cores = 0;
    std::int64_t free_memory_mb = 0;
    std::vector<DynamicSlot> dynamic_slots;
    bool draining = false;
    int next_dyn_seq = 0;
};

PartitionableSlot make_pslot(const Machine& m, std::string id_prefix, int cores_limit = 0);

bool can_carve(const PartitionableSlot& p, int cores, std::int64_t memory_mb);

// Carves a dynamic slot.  Throws SimError(Draining) when the slot is
// draining and SimError(InsufficientResources) when the request does not
// fit; the pslot is unchanged on error.
DynamicSlot& carve(PartitionableSlot& p, int cores, std::int64_t memory_mb);

// Returns the slot's resources.  Throws SimError(UnknownSlot).
void release(PartitionableSlot& p, std::string_view dynamic_slot_id);

DynamicSlot* find_dynamic_slot(PartitionableSlot& p, std::string_view dynamic_slot_id);

// Number of non-draining pslots with at least threshold_cores free.
int whole_machine_count(const std::vector<const PartitionableSlot*>& slots, int threshold_cores);

// Conservation check: free + carved == total on both dimensions.
bool conserves(const PartitionableSlot& p);

} // namespace farmsim
