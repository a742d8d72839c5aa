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

#include "farmsim/provisioning.hpp"

#include "farmsim/engine.hpp"

namespace farmsim {

// Launcher pass for one machine.  Static startds register immediately with
// whatever wrapper the current VM image carries; vacuum glideins snapshot
// the frontend's wrapper version and must pass host validation before they
// may join a pool.
Pilot* World::launcher_tick(Machine& m) { return launcher_tick(m, scenario.provisioning.model); }

Pilot* World::launcher_tick(Machine& m, PilotModel model) {
    if (!m.available || now < m.retry_after || !m.live_pilot.empty()) return nullptr;

    std::string pilot_id = m.id + "/p" + std::to_string(m.pilot_seq++);
    Pilot p;
    p.id = pilot_id;
    p.machine_id = m.id;
    p.model = model;
    p.launch_time = now;
    ++pilots_launched;

    if (p.model == PilotModel::StaticStartd) {
        if (pending_rebuild && now >= pending_rebuild->effective_time) {
            static_image_version = pending_rebuild->version;
            pending_rebuild.reset();
        }
        p.wrapper_version = static_image_version;
        p.state = PilotState::Registered;
        p.config = scenario.provisioning.glidein;
        p.config.start_expr_source = scenario.provisioning.static_start_expr;
        p.config.start_expr = expr::parse(p.config.start_expr_source);
        p.pslot = make_pslot(m, pilot_id); // static VMs advertise the whole node
        m.live_pilot = pilot_id;
        Pilot& stored = pilots.emplace(pilot_id, std::move(p)).first->second;
        trace.pilot_event(now, stored, PilotState::Registered, PilotState::Registered, "launch");
        register_pilot_ad(stored);
        return &stored;
    }

    p.wrapper_version = frontend.wrapper_version;
    p.state = PilotState::Validating;
    p.config = frontend.published_config;
    int limit = p.config.cpus.whole_node ? 0 : p.config.cpus.fixed;
    p.pslot = make_pslot(m, pilot_id, limit);
    m.live_pilot = pilot_id;
    Pilot& stored = pilots.emplace(pilot_id, std::move(p)).first->second;
    trace.pilot_event(now, stored, PilotState::Validating, PilotState::Validating, "launch");
    if (!validate_pilot(stored, m)) return nullptr;
    return &pilots.at(pilot_id);
}

// Host probe before joining the pool; the whole point of the glidein model
// is that a broken host never advertises slots.
bool World::validate_pilot(Pilot& p, Machine& m) {
    if (p.state != PilotState::Validating)
        throw SimError(ErrorKind::InvalidTransition, "validate requires a validating pilot");
    if (m.cvmfs_healthy) {
        p.state = PilotState::Registered;
        trace.pilot_event(now, p, PilotState::Validating, PilotState::Registered, "validated");
        register_pilot_ad(p);
        p.idle_since = now;
        schedule_pilot_deadline(p, PilotDeadline::IdleTimeout, now + p.config.max_idle_s);
        schedule_pilot_deadline(p, PilotDeadline::WalltimeRetire,
                                p.launch_time + p.config.max_walltime_s);
        return true;
    }
    ++pilot_validation_failures;
    trace.pilot_event(now, p, PilotState::Validating, PilotState::Terminated,
                      "validation_failed");
    m.live_pilot.clear();
    m.retry_after = now + scenario.provisioning.validation_retry_backoff_s;
    Event retry;
    retry.time = m.retry_after;
    retry.kind = EventKind::LauncherTick;
    retry.machine_id = m.id;
    schedule(retry);
    pilots.erase(p.id);
    return false;
}

void World::register_pilot_ad(Pilot& p) {
    const Machine& m = machines.at(p.machine_id);
    PoolId pid = pool_for_site(m.site);
    p.pool = pid;
    SlotAd ad;
    ad.pilot_id = p.id;
    ad.machine_id = m.id;
    ad.site = m.site;
    ad.start = p.config.start_expr;
    ad.attributes.set("GLIDEIN_CMSSite", expr::Value::str(m.site));
    pool(pid).slot_ads[p.id] = std::move(ad);
}

void World::terminate_pilot(Pilot& p, const std::string& reason) {
    if (!p.pslot.dynamic_slots.empty())
        throw InvariantViolation("terminating pilot " + p.id + " with claimed slots");
    trace.pilot_event(now, p, p.state, PilotState::Terminated, reason);
    p.state = PilotState::Terminated;
    ++pilots_terminated;
    pool(p.pool).slot_ads.erase(p.id);
    Machine& m = machines.at(p.machine_id);
    if (m.live_pilot == p.id) m.live_pilot.clear();

    // the launcher service reacts to the pilot exiting, not to a timer
    Event relaunch;
    relaunch.time = now;
    relaunch.kind = EventKind::LauncherTick;
    relaunch.machine_id = p.machine_id;
    schedule(relaunch);

    pilots.erase(p.id); // `p` is dangling from here on
}

// Runs after every dynamic-slot release on this pilot's pslot.
void World::after_release(Pilot& p) {
    if (!p.pslot.dynamic_slots.empty()) return;
    if (p.pslot.draining) {
        p.pslot.draining = false; // drained dry; counts as whole again
        trace.defrag_event(now, p.machine_id, false, current_whole_count());
    }
    if (p.state == PilotState::Retiring) {
        terminate_pilot(p, "drained_out");
        return;
    }
    if (p.model == PilotModel::VacuumGlidein && !p.suspended &&
        p.state == PilotState::Registered) {
        p.idle_since = now;
        schedule_pilot_deadline(p, PilotDeadline::IdleTimeout, now + p.config.max_idle_s);
    }
}

void World::pilot_deadline_event(const Event& ev) {
    auto it = pilots.find(ev.pilot_id);
    if (it == pilots.end()) return; // already gone
    Pilot& p = it->second;

    switch (ev.deadline) {
        case PilotDeadline::IdleTimeout: {
            if (p.model != PilotModel::VacuumGlidein) return;
            if (p.state != PilotState::Registered || p.suspended) return;
            if (!p.idle_since || !p.pslot.dynamic_slots.empty()) return;
            if (now < *p.idle_since + p.config.max_idle_s) return; // idle clock was reset
            terminate_pilot(p, "idle_timeout");
            return;
        }
        case PilotDeadline::WalltimeRetire: {
            if (p.model != PilotModel::VacuumGlidein) return;
            if (p.state != PilotState::Registered) return;
            trace.pilot_event(now, p, PilotState::Registered, PilotState::Retiring, "walltime");
            p.state = PilotState::Retiring;
            p.retire_start = now;
            if (p.pslot.dynamic_slots.empty()) {
                terminate_pilot(p, "retired_empty");
                return;
            }
            schedule_pilot_deadline(p, PilotDeadline::GraceExpiry,
                                    now + p.config.retire_grace_s);
            return;
        }
        case PilotDeadline::GraceExpiry: {
            if (p.state != PilotState::Retiring) return;
            std::vector<std::string> victims;
            for (const auto& d : p.pslot.dynamic_slots)
                if (d.claimed_job) victims.push_back(*d.claimed_job);
            // requeue each victim; releasing the last slot terminates the
            // pilot through after_release, so `p` must not be touched after
            for (const auto& job_id : victims)
                requeue_job(*this, job_id, FailReason::PilotPreempted, now);
            auto again = pilots.find(ev.pilot_id);
            if (again != pilots.end() && again->second.state == PilotState::Retiring &&
                again->second.pslot.dynamic_slots.empty())
                terminate_pilot(again->second, "grace_expired");
            return;
        }
    }
}

// Rolls a new VM image carrying the current wrapper; takes effect only for
// static pilots launched after the coordination delay, existing ones keep
// running untouched.
void World::rebuild_image() {
    pending_rebuild = PendingImageRebuild{
        frontend.wrapper_version, now + scenario.provisioning.frontend.image_rebuild_delay_s};
}

void World::frontend_reconfigure() { frontend.reconfigure(); }

} // namespace farmsim
