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
#include <map>
#include <optional>
#include <queue>
#include <string>
#include <vector>

#include "farmsim/metrics.hpp"
#include "farmsim/scenario.hpp"
#include "farmsim/trace.hpp"

namespace farmsim {

enum class EventKind {
    NegotiationCycle,
    LauncherTick,
    PilotTick,
    DefragCycle,
    PhaseChange,
    JobArrival,
    JobCompletion,
    FrontendReconfigure,
    ImageRebuild,
    MetricsSample,
    MigrateSite,
};

enum class PilotDeadline { IdleTimeout, WalltimeRetire, GraceExpiry };

// Events are processed in strict (time, sequence) order; the sequence
// number is assigned at scheduling time.
struct Event {
    double time = 0;
    std::uint64_t seq = 0;
    EventKind kind = EventKind::MetricsSample;

    PoolId pool = PoolId::GlobalPool;
    std::string machine_id; // LauncherTick target (empty: all machines)
    std::string pilot_id;
    std::string job_id;
    std::uint64_t epoch = 0;
    PilotDeadline deadline = PilotDeadline::IdleTimeout;
    std::size_t stream = 0;
    std::size_t index = 0;
    std::size_t migration = 0;
};

struct EventAfter {
    bool operator()(const Event& a, const Event& b) const {
        if (a.time != b.time) return a.time > b.time;
        return a.seq > b.seq;
    }
};

// Prebuilt workload entry: every random draw happens at generation time so
// job identity never depends on how a run interleaves.
struct PendingJob {
    double arrival_time = 0;
    PoolId pool = PoolId::GlobalPool;
    JobAd job;
};

struct PendingImageRebuild {
    std::int64_t version = 0;
    double effective_time = 0;
};

// Snapshot of a job at the end of a run, for reporting and tests.
struct JobOutcome {
    std::string id;
    JobClass job_class = JobClass::Production;
    PoolId pool = PoolId::GlobalPool;
    JobState state = JobState::Idle;
    double submit_time = 0;
    std::optional<double> first_start_time;
    std::optional<double> completion_time;
    std::optional<FailReason> fail_reason;
    double work_seconds = 0;
    int hibernation_timeouts = 0;
    int preemptions = 0;
};

struct PilotOutcome {
    std::string id;
    std::string machine_id;
    PilotModel model = PilotModel::VacuumGlidein;
    PilotState state = PilotState::Registered;
    std::int64_t wrapper_version = 0;
    double launch_time = 0;
};

struct RunResult {
    MetricsSeries metrics;
    Trace trace;
    std::map<std::string, JobOutcome> jobs;
    std::vector<PilotOutcome> live_pilots;
    std::vector<std::string> unhealthy_machines;
    std::int64_t frontend_wrapper_version = 0;
};

// The entire mutable state of one simulation.  Owned by a single event
// loop; independent worlds may run in parallel.
struct World {
    explicit World(Scenario scenario);
    World(Scenario scenario, std::uint64_t seed_override);

    Scenario scenario;
    std::uint64_t seed = 0;
    double now = 0;

    std::map<std::string, Machine> machines;
    std::map<std::string, Pilot> pilots; // live pilots only
    std::map<PoolId, Pool> pools;
    std::map<std::string, PoolId> site_pool;

    Frontend frontend;
    std::int64_t static_image_version = 1;
    std::optional<PendingImageRebuild> pending_rebuild;

    std::vector<PhaseTransition> phase_plan;
    Phase current_phase = Phase::Interfill;

    std::vector<std::vector<PendingJob>> stream_jobs;

    std::priority_queue<Event, std::vector<Event>, EventAfter> queue;
    std::uint64_t next_seq = 0;

    Trace trace;
    MetricsSeries metrics;

    // aggregate counters kept in lockstep with state for cheap invariants
    std::int64_t claims = 0;
    std::int64_t jobs_running = 0;
    std::int64_t jobs_suspended = 0;
    std::array<std::int64_t, 3> idle_count{}; // by JobClass index
    std::int64_t pilots_launched = 0;
    std::int64_t pilots_terminated = 0;
    std::int64_t pilot_validation_failures = 0;
    std::map<std::string, std::int64_t> failure_counts; // by reason name
    std::int64_t wrapper_staleness_max = 0;

    // --- scheduling ---
    void schedule(Event ev);
    void schedule_job_completion(const JobAd& job);
    void schedule_pilot_deadline(const Pilot& p, PilotDeadline kind, double at);

    // --- module hooks driven by the loop ---
    Pilot* launcher_tick(Machine& m); // scenario's provisioning model
    Pilot* launcher_tick(Machine& m, PilotModel model);
    bool validate_pilot(Pilot& p, Machine& m);
    void pilot_deadline_event(const Event& ev);
    void terminate_pilot(Pilot& p, const std::string& reason);
    void register_pilot_ad(Pilot& p);
    void after_release(Pilot& p);
    void apply_phase_change(Phase from, Phase to);
    void rebuild_image();
    void frontend_reconfigure();

    // --- engine loop ---
    void run_loop();
    void process(const Event& ev);
    void take_metrics_sample();
    void check_invariants_cheap() const;
    void check_invariants_deep() const;
    MetricsSummary finalize_summary();
    RunResult finish();

    Pool& pool(PoolId id);
    Pilot* live_pilot_on(const Machine& m);
    JobAd* find_job(const std::string& id);
    PoolId pool_for_site(const std::string& site) const;
    bool machine_available_now(const Machine& m) const;

    // live pslots eligible for matching/defrag bookkeeping
    std::vector<const PartitionableSlot*> live_pslots() const;
    int current_whole_count() const;

  private:
    void init();
};

// Validates, runs to scenario.duration_s, and reports.  Deterministic:
// identical (scenario, seed) pairs produce byte-identical csv and trace.
RunResult run(const Scenario& scenario);
RunResult run(const Scenario& scenario, std::uint64_t seed_override);

struct ComparisonReport {
    std::string scenario_a, scenario_b;
    MetricsSummary summary_a, summary_b;
    std::vector<std::int64_t> whole_slots_a, whole_slots_b;
    std::vector<double> sample_times;
    std::string to_json() const;
};

// Runs both scenarios with the same seed (in parallel) and reports the
// side-by-side latency, failure and whole-slot numbers.
ComparisonReport compare(const Scenario& a, const Scenario& b, std::uint64_t seed);

} // namespace farmsim
