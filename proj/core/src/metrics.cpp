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

#include "farmsim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "farmsim/errors.hpp"

namespace farmsim {

using nlohmann::json;

const char* const kMetricsCsvHeader =
    "time,cores_running_tier0,cores_running_production,cores_running_analysis,"
    "cores_free,cores_suspended,cores_draining_idle,whole_slots,"
    "idle_tier0,idle_production,idle_analysis";

double quantile(std::vector<double> values, double q) {
    if (values.empty()) return 0;
    std::sort(values.begin(), values.end());
    // nearest-rank
    std::size_t rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(values.size())));
    if (rank == 0) rank = 1;
    if (rank > values.size()) rank = values.size();
    return values[rank - 1];
}

std::string metrics_to_csv(const MetricsSeries& m) {
    std::string out = kMetricsCsvHeader;
    out += '\n';
    char buf[320];
    for (const auto& s : m.samples) {
        std::snprintf(buf, sizeof(buf),
                      "%.3f,%lld,%lld,%lld,%lld,%lld,%lld,%lld,%lld,%lld,%lld\n", s.time,
                      static_cast<long long>(s.cores_running_tier0),
                      static_cast<long long>(s.cores_running_production),
                      static_cast<long long>(s.cores_running_analysis),
                      static_cast<long long>(s.cores_free),
                      static_cast<long long>(s.cores_suspended),
                      static_cast<long long>(s.cores_draining_idle),
                      static_cast<long long>(s.whole_slots),
                      static_cast<long long>(s.idle_tier0),
                      static_cast<long long>(s.idle_production),
                      static_cast<long long>(s.idle_analysis));
        out += buf;
    }
    return out;
}

void write_metrics_csv(const MetricsSeries& m, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw SimError(ErrorKind::IoError, "cannot open " + path + " for writing");
    f << metrics_to_csv(m);
    if (!f) throw SimError(ErrorKind::IoError, "write failed: " + path);
}

std::vector<MetricsSample> read_metrics_csv(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw SimError(ErrorKind::IoError, "cannot open " + path);
    std::string line;
    if (!std::getline(f, line)) throw SimError(ErrorKind::IoError, "empty csv: " + path);
    if (line != kMetricsCsvHeader)
        throw SimError(ErrorKind::IoError, "unexpected csv header in " + path);
    std::vector<MetricsSample> out;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        MetricsSample s;
        long long v[10];
        if (std::sscanf(line.c_str(), "%lf,%lld,%lld,%lld,%lld,%lld,%lld,%lld,%lld,%lld,%lld",
                        &s.time, &v[0], &v[1], &v[2], &v[3], &v[4], &v[5], &v[6], &v[7], &v[8],
                        &v[9]) != 11)
            throw SimError(ErrorKind::IoError, "malformed csv row: " + line);
        s.cores_running_tier0 = v[0];
        s.cores_running_production = v[1];
        s.cores_running_analysis = v[2];
        s.cores_free = v[3];
        s.cores_suspended = v[4];
        s.cores_draining_idle = v[5];
        s.whole_slots = v[6];
        s.idle_tier0 = v[7];
        s.idle_production = v[8];
        s.idle_analysis = v[9];
        out.push_back(s);
    }
    return out;
}

namespace {

json sample_to_json(const MetricsSample& s) {
    return json{{"time", s.time},
                {"cores_running_tier0", s.cores_running_tier0},
                {"cores_running_production", s.cores_running_production},
                {"cores_running_analysis", s.cores_running_analysis},
                {"cores_free", s.cores_free},
                {"cores_suspended", s.cores_suspended},
                {"cores_draining_idle", s.cores_draining_idle},
                {"whole_slots", s.whole_slots},
                {"idle_tier0", s.idle_tier0},
                {"idle_production", s.idle_production},
                {"idle_analysis", s.idle_analysis}};
}

MetricsSample sample_from_json(const json& j) {
    MetricsSample s;
    s.time = j.at("time").get<double>();
    s.cores_running_tier0 = j.at("cores_running_tier0").get<std::int64_t>();
    s.cores_running_production = j.at("cores_running_production").get<std::int64_t>();
    s.cores_running_analysis = j.at("cores_running_analysis").get<std::int64_t>();
    s.cores_free = j.at("cores_free").get<std::int64_t>();
    s.cores_suspended = j.at("cores_suspended").get<std::int64_t>();
    s.cores_draining_idle = j.at("cores_draining_idle").get<std::int64_t>();
    s.whole_slots = j.at("whole_slots").get<std::int64_t>();
    s.idle_tier0 = j.at("idle_tier0").get<std::int64_t>();
    s.idle_production = j.at("idle_production").get<std::int64_t>();
    s.idle_analysis = j.at("idle_analysis").get<std::int64_t>();
    return s;
}

json latency_to_json(const LatencyStats& l) {
    return json{{"submitted", l.submitted}, {"started", l.started}, {"p50", l.p50}, {"p95", l.p95}};
}

LatencyStats latency_from_json(const json& j) {
    LatencyStats l;
    l.submitted = j.at("submitted").get<std::int64_t>();
    l.started = j.at("started").get<std::int64_t>();
    l.p50 = j.at("p50").get<double>();
    l.p95 = j.at("p95").get<double>();
    return l;
}

json summary_to_json(const MetricsSummary& s) {
    json lat_class = json::object();
    for (const auto& [k, v] : s.latency_by_class) lat_class[k] = latency_to_json(v);
    json lat_pool = json::object();
    for (const auto& [k, v] : s.latency_by_pool_class) lat_pool[k] = latency_to_json(v);
    json failures = json::object();
    for (const auto& [k, v] : s.failures) failures[k] = v;
    json pilots_by_state = json::object();
    for (const auto& [k, v] : s.pilots_by_state) pilots_by_state[k] = v;
    return json{{"scenario_name", s.scenario_name},
                {"pilots_by_state", pilots_by_state},
                {"seed", s.seed},
                {"duration_s", s.duration_s},
                {"latency_by_class", lat_class},
                {"latency_by_pool_class", lat_pool},
                {"failures", failures},
                {"jobs_submitted", s.jobs_submitted},
                {"jobs_completed", s.jobs_completed},
                {"jobs_failed", s.jobs_failed},
                {"pilots_launched", s.pilots_launched},
                {"pilots_terminated", s.pilots_terminated},
                {"pilot_validation_failures", s.pilot_validation_failures},
                {"pilots_live_final", s.pilots_live_final},
                {"wrapper_staleness_max", s.wrapper_staleness_max}};
}

MetricsSummary summary_from_json(const json& j) {
    MetricsSummary s;
    s.scenario_name = j.at("scenario_name").get<std::string>();
    s.seed = j.at("seed").get<std::uint64_t>();
    s.duration_s = j.at("duration_s").get<double>();
    for (const auto& [k, v] : j.at("latency_by_class").items())
        s.latency_by_class[k] = latency_from_json(v);
    for (const auto& [k, v] : j.at("latency_by_pool_class").items())
        s.latency_by_pool_class[k] = latency_from_json(v);
    for (const auto& [k, v] : j.at("failures").items()) s.failures[k] = v.get<std::int64_t>();
    for (const auto& [k, v] : j.at("pilots_by_state").items())
        s.pilots_by_state[k] = v.get<std::int64_t>();
    s.jobs_submitted = j.at("jobs_submitted").get<std::int64_t>();
    s.jobs_completed = j.at("jobs_completed").get<std::int64_t>();
    s.jobs_failed = j.at("jobs_failed").get<std::int64_t>();
    s.pilots_launched = j.at("pilots_launched").get<std::int64_t>();
    s.pilots_terminated = j.at("pilots_terminated").get<std::int64_t>();
    s.pilot_validation_failures = j.at("pilot_validation_failures").get<std::int64_t>();
    s.pilots_live_final = j.at("pilots_live_final").get<std::int64_t>();
    s.wrapper_staleness_max = j.at("wrapper_staleness_max").get<std::int64_t>();
    return s;
}

} // namespace

std::string metrics_to_json(const MetricsSeries& m) {
    json series = json::array();
    for (const auto& s : m.samples) series.push_back(sample_to_json(s));
    json root{{"series", series}, {"summary", summary_to_json(m.summary)}};
    return root.dump(2) + "\n";
}

void write_metrics_json(const MetricsSeries& m, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw SimError(ErrorKind::IoError, "cannot open " + path + " for writing");
    f << metrics_to_json(m);
    if (!f) throw SimError(ErrorKind::IoError, "write failed: " + path);
}

MetricsSeries read_metrics_json(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw SimError(ErrorKind::IoError, "cannot open " + path);
    json root = json::parse(f);
    MetricsSeries m;
    for (const auto& s : root.at("series")) m.samples.push_back(sample_from_json(s));
    m.summary = summary_from_json(root.at("summary"));
    return m;
}

void write_summary_json(const MetricsSummary& s, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw SimError(ErrorKind::IoError, "cannot open " + path + " for writing");
    f << summary_to_json(s).dump(2) << "\n";
    if (!f) throw SimError(ErrorKind::IoError, "write failed: " + path);
}

} // namespace farmsim
