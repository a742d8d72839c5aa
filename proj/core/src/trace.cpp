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

#include "farmsim/trace.hpp"

#include <algorithm>
#include <cstdio>

namespace farmsim {

const char* to_string(JobClass c) {
    switch (c) {
        case JobClass::Tier0: return "tier0";
        case JobClass::Production: return "production";
        case JobClass::Analysis: return "analysis";
    }
    return "?";
}

const char* to_string(JobState s) {
    switch (s) {
        case JobState::Idle: return "idle";
        case JobState::Running: return "running";
        case JobState::Suspended: return "suspended";
        case JobState::Completed: return "completed";
        case JobState::Failed: return "failed";
        case JobState::Removed: return "removed";
    }
    return "?";
}

const char* to_string(FailReason r) {
    switch (r) {
        case FailReason::ValidationGap: return "validation_gap";
        case FailReason::PilotPreempted: return "pilot_preempted";
        case FailReason::HibernationTimeout: return "hibernation_timeout";
        case FailReason::Other: return "other";
    }
    return "?";
}

const char* to_string(PilotModel m) {
    switch (m) {
        case PilotModel::StaticStartd: return "static_startd";
        case PilotModel::VacuumGlidein: return "vacuum_glidein";
    }
    return "?";
}

const char* to_string(PilotState s) {
    switch (s) {
        case PilotState::Validating: return "validating";
        case PilotState::Registered: return "registered";
        case PilotState::Retiring: return "retiring";
        case PilotState::Terminated: return "terminated";
    }
    return "?";
}

const char* to_string(PoolId p) {
    switch (p) {
        case PoolId::GlobalPool: return "GlobalPool";
        case PoolId::CERNPool: return "CERNPool";
    }
    return "?";
}

void Trace::job_event(double t, const std::string& id, JobState from, JobState to,
                      const std::string& machine, const std::string& reason) {
    jobs.push_back({next_ord++, t, id, from, to, machine, reason});
}

void Trace::pilot_event(double t, const Pilot& p, PilotState from, PilotState to,
                        const std::string& reason) {
    pilots.push_back(
        {next_ord++, t, p.id, p.machine_id, p.model, from, to, p.wrapper_version, reason});
}

void Trace::defrag_event(double t, const std::string& machine, bool drain, int whole_count) {
    defrag.push_back({next_ord++, t, machine, drain, whole_count});
}

void Trace::phase_event(double t, Phase from, Phase to) {
    phases.push_back({next_ord++, t, from, to});
}

void Trace::migration_event(double t, const std::string& site, PoolId from, PoolId to,
                            std::size_t moved) {
    migrations.push_back({next_ord++, t, site, from, to, moved});
}

namespace {

std::string fmt_time(double t) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6f", t);
    return buf;
}

struct Row {
    std::uint64_t ord;
    std::string text;
};

} // namespace

std::string Trace::to_csv() const {
    std::vector<Row> rows;
    rows.reserve(jobs.size() + pilots.size() + defrag.size() + phases.size() + migrations.size());
    for (const auto& j : jobs)
        rows.push_back({j.ord, std::to_string(j.ord) + "," + fmt_time(j.time) + ",job," + j.job_id +
                                   "," + j.machine_id + "," + to_string(j.from) + "," +
                                   to_string(j.to) + "," + j.reason});
    for (const auto& p : pilots)
        rows.push_back({p.ord, std::to_string(p.ord) + "," + fmt_time(p.time) + ",pilot," +
                                   p.pilot_id + "," + p.machine_id + "," + to_string(p.from) + "," +
                                   to_string(p.to) + "," + to_string(p.model) + ":v" +
                                   std::to_string(p.wrapper_version) + ":" + p.reason});
    for (const auto& d : defrag)
        rows.push_back({d.ord, std::to_string(d.ord) + "," + fmt_time(d.time) + ",defrag," +
                                   d.machine_id + "," + d.machine_id + ",," +
                                   (d.drain ? "drain" : "undrain") + ",whole=" +
                                   std::to_string(d.whole_count)});
    for (const auto& ph : phases)
        rows.push_back({ph.ord, std::to_string(ph.ord) + "," + fmt_time(ph.time) + ",phase,,," +
                                    to_string(ph.from) + "," + to_string(ph.to) + ","});
    for (const auto& m : migrations)
        rows.push_back({m.ord, std::to_string(m.ord) + "," + fmt_time(m.time) + ",migrate," +
                                   m.site + ",," + to_string(m.from) + "," + to_string(m.to) +
                                   ",moved=" + std::to_string(m.moved)});
    std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.ord < b.ord; });

    std::string out = "ord,time,type,subject,machine,from,to,detail\n";
    for (const auto& r : rows) {
        out += r.text;
        out += '\n';
    }
    return out;
}

std::uint64_t Trace::digest() const {
    std::uint64_t h = 1469598103934665603ull;
    for (char c : to_csv()) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ull;
    }
    return h;
}

} // namespace farmsim
