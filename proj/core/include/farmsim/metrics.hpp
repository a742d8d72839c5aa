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
#include <string>
#include <vector>

namespace farmsim {

// One sampled row.  Conservation identity, checked at every sample:
//   running(all classes) + free + suspended + draining_idle == total cores.
// cores_free includes cores of machines with no live pilot; cores_suspended
// covers every core of a machine whose pilot is suspended; draining_idle is
// the unclaimed remainder of draining or retiring pslots.
struct MetricsSample {
    double time = 0;
    std::int64_t cores_running_tier0 = 0;
    std::int64_t cores_running_production = 0;
    std::int64_t cores_running_analysis = 0;
    std::int64_t cores_free = 0;
    std::int64_t cores_suspended = 0;
    std::int64_t cores_draining_idle = 0;
    std::int64_t whole_slots = 0;
    std::int64_t idle_tier0 = 0;
    std::int64_t idle_production = 0;
    std::int64_t idle_analysis = 0;

    bool operator==(const MetricsSample&) const = default;

    std::int64_t cores_running_total() const {
        return cores_running_tier0 + cores_running_production + cores_running_analysis;
    }
};

struct LatencyStats {
    std::int64_t submitted = 0;
    std::int64_t started = 0;
    double p50 = 0; // start - submit, nearest-rank quantiles over started jobs
    double p95 = 0;

    bool operator==(const LatencyStats&) const = default;
};

struct MetricsSummary {
    std::string scenario_name;
    std::uint64_t seed = 0;
    double duration_s = 0;

    std::map<std::string, LatencyStats> latency_by_class;          // tier0/production/analysis
    std::map<std::string, LatencyStats> latency_by_pool_class;     // "GlobalPool/tier0", ...
    std::map<std::string, std::int64_t> failures;                  // by reason
    std::int64_t jobs_submitted = 0;
    std::int64_t jobs_completed = 0;
    std::int64_t jobs_failed = 0;
    std::int64_t pilots_launched = 0;
    std::int64_t pilots_terminated = 0;
    std::int64_t pilot_validation_failures = 0;
    std::int64_t pilots_live_final = 0;
    std::map<std::string, std::int64_t> pilots_by_state; // live per state; terminated cumulative
    std::int64_t wrapper_staleness_max = 0; // max(frontend version - live pilot version)

    bool operator==(const MetricsSummary&) const = default;
};

struct MetricsSeries {
    std::vector<MetricsSample> samples;
    MetricsSummary summary;

    bool operator==(const MetricsSeries&) const = default;
};

// Fixed column order; see README for the documented schema.
extern const char* const kMetricsCsvHeader;

std::string metrics_to_csv(const MetricsSeries& m);
void write_metrics_csv(const MetricsSeries& m, const std::string& path);
std::vector<MetricsSample> read_metrics_csv(const std::string& path);

// Single object {"series": [...], "summary": {...}}.
std::string metrics_to_json(const MetricsSeries& m);
void write_metrics_json(const MetricsSeries& m, const std::string& path);
MetricsSeries read_metrics_json(const std::string& path);

void write_summary_json(const MetricsSummary& s, const std::string& path);

// Nearest-rank quantile over an unsorted copy; q in (0, 1].
double quantile(std::vector<double> values, double q);

} // namespace farmsim
