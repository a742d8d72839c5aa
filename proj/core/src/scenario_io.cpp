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

#include "farmsim/scenario_io.hpp"

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>

#include <json.hpp>

#include "farmsim/errors.hpp"

namespace farmsim {

using nlohmann::json;

namespace {

// Collects violations instead of bailing at the first; misspelled keys are
// hard errors, not silently-defaulted knobs.
struct Ctx {
    std::vector<std::string> violations;

    void bad(const std::string& path, const std::string& msg) {
        violations.push_back(path + ": " + msg);
    }

    void check_keys(const json& j, const std::string& path,
                    std::initializer_list<const char*> allowed) {
        if (!j.is_object()) {
            bad(path, "expected an object");
            return;
        }
        std::set<std::string> ok(allowed.begin(), allowed.end());
        for (const auto& [key, value] : j.items())
            if (!ok.count(key)) bad(path, "unknown key '" + key + "'");
    }

    double num(const json& j, const char* key, const std::string& path, double def,
               bool required = false) {
        if (!j.is_object() || !j.contains(key)) {
            if (required) bad(path, std::string("missing required key '") + key + "'");
            return def;
        }
        if (!j[key].is_number()) {
            bad(path + "." + key, "expected a number");
            return def;
        }
        return j[key].get<double>();
    }

    std::int64_t integer(const json& j, const char* key, const std::string& path, std::int64_t def,
                         bool required = false) {
        if (!j.is_object() || !j.contains(key)) {
            if (required) bad(path, std::string("missing required key '") + key + "'");
            return def;
        }
        if (!j[key].is_number_integer()) {
            bad(path + "." + key, "expected an integer");
            return def;
        }
        return j[key].get<std::int64_t>();
    }

    std::string str(const json& j, const char* key, const std::string& path,
                    const std::string& def, bool required = false) {
        if (!j.is_object() || !j.contains(key)) {
            if (required) bad(path, std::string("missing required key '") + key + "'");
            return def;
        }
        if (!j[key].is_string()) {
            bad(path + "." + key, "expected a string");
            return def;
        }
        return j[key].get<std::string>();
    }

    bool boolean(const json& j, const char* key, const std::string& path, bool def) {
        if (!j.is_object() || !j.contains(key)) return def;
        if (!j[key].is_boolean()) {
            bad(path + "." + key, "expected a boolean");
            return def;
        }
        return j[key].get<bool>();
    }

    std::vector<double> num_list(const json& j, const char* key, const std::string& path) {
        std::vector<double> out;
        if (!j.is_object() || !j.contains(key)) return out;
        if (!j[key].is_array()) {
            bad(path + "." + key, "expected an array of numbers");
            return out;
        }
        for (const auto& e : j[key]) {
            if (!e.is_number()) {
                bad(path + "." + key, "expected numbers only");
                return out;
            }
            out.push_back(e.get<double>());
        }
        return out;
    }
};

PoolId parse_pool_id(const std::string& s, const std::string& path, Ctx& c) {
    if (s == "global") return PoolId::GlobalPool;
    if (s == "cern") return PoolId::CERNPool;
    c.bad(path, "unknown pool '" + s + "' (expected global|cern)");
    return PoolId::GlobalPool;
}

JobClass parse_class(const std::string& s, const std::string& path, Ctx& c) {
    if (s == "tier0") return JobClass::Tier0;
    if (s == "production") return JobClass::Production;
    if (s == "analysis") return JobClass::Analysis;
    c.bad(path, "unknown job class '" + s + "'");
    return JobClass::Production;
}

Phase parse_phase(const std::string& s, const std::string& path, Ctx& c) {
    if (s == "fill") return Phase::Fill;
    if (s == "interfill") return Phase::Interfill;
    if (s == "technical_stop") return Phase::TechnicalStop;
    c.bad(path, "unknown phase '" + s + "'");
    return Phase::Interfill;
}

MachineGroup parse_machine_group(const json& j, const std::string& path, Ctx& c) {
    c.check_keys(j, path, {"name_prefix", "count", "cores", "memory_mb", "site", "availability"});
    MachineGroup g;
    g.name_prefix = c.str(j, "name_prefix", path, "m");
    g.count = static_cast<int>(c.integer(j, "count", path, 1));
    g.cores = static_cast<int>(c.integer(j, "cores", path, 16));
    g.memory_mb = c.integer(j, "memory_mb", path, g.cores * 2000ll);
    g.site = c.str(j, "site", path, "", true);
    std::string avail = c.str(j, "availability", path, "permanent");
    if (avail == "permanent") g.availability = AvailabilityClass::Permanent;
    else if (avail == "opportunistic") g.availability = AvailabilityClass::Opportunistic;
    else c.bad(path + ".availability", "expected permanent|opportunistic");
    return g;
}

ProvisioningSpec parse_provisioning(const json& j, const std::string& path, Ctx& c) {
    c.check_keys(j, path,
                 {"model", "glidein", "static_start_expr", "launcher_interval_s",
                  "validation_retry_backoff_s", "wrapper_version", "frontend_reconfigure_times_s",
                  "image_rebuild_times_s", "image_rebuild_delay_s"});
    ProvisioningSpec p;
    std::string model = c.str(j, "model", path, "", true);
    if (model == "static_startd" || model == "static") p.model = PilotModel::StaticStartd;
    else if (model == "vacuum_glidein" || model == "vacuum") p.model = PilotModel::VacuumGlidein;
    else c.bad(path + ".model", "expected static_startd|vacuum_glidein");

    if (j.is_object() && j.contains("glidein")) {
        const json& g = j["glidein"];
        std::string gp = path + ".glidein";
        c.check_keys(g, gp, {"max_idle_s", "max_walltime_s", "cpus", "retire_grace_s", "start_expr"});
        p.glidein.max_idle_s = c.num(g, "max_idle_s", gp, 3600);
        p.glidein.max_walltime_s = c.num(g, "max_walltime_s", gp, 172800);
        p.glidein.retire_grace_s = c.num(g, "retire_grace_s", gp, 3600);
        p.glidein.start_expr_source = c.str(g, "start_expr", gp, kProductionOnlyStartExpr);
        if (g.is_object() && g.contains("cpus")) {
            if (g["cpus"].is_string() && g["cpus"] == "whole_node") {
                p.glidein.cpus.whole_node = true;
            } else if (g["cpus"].is_number_integer()) {
                p.glidein.cpus.whole_node = false;
                p.glidein.cpus.fixed = g["cpus"].get<int>();
            } else {
                c.bad(gp + ".cpus", "expected \"whole_node\" or an integer");
            }
        }
    }
    p.static_start_expr = c.str(j, "static_start_expr", path, "true");
    p.launcher_interval_s = c.num(j, "launcher_interval_s", path, 300);
    p.validation_retry_backoff_s = c.num(j, "validation_retry_backoff_s", path, 1800);
    p.frontend.initial_wrapper_version = c.integer(j, "wrapper_version", path, 1);
    p.frontend.reconfigure_times_s = c.num_list(j, "frontend_reconfigure_times_s", path);
    p.frontend.image_rebuild_times_s = c.num_list(j, "image_rebuild_times_s", path);
    p.frontend.image_rebuild_delay_s = c.num(j, "image_rebuild_delay_s", path, 604800);
    return p;
}

PoolSpec parse_pool(const json& j, const std::string& path, Ctx& c) {
    c.check_keys(j, path,
                 {"id", "cycle_interval_s", "class_priority", "pack_policy", "max_hibernation_s"});
    PoolSpec p;
    p.id = parse_pool_id(c.str(j, "id", path, "", true), path + ".id", c);
    p.negotiator.cycle_interval_s = c.num(j, "cycle_interval_s", path, 60);
    p.negotiator.max_hibernation_s = c.num(j, "max_hibernation_s", path, 86400);
    std::string pack = c.str(j, "pack_policy", path, "best_fit");
    if (pack == "best_fit") p.negotiator.pack_policy = PackPolicy::BestFit;
    else if (pack == "worst_fit") p.negotiator.pack_policy = PackPolicy::WorstFit;
    else if (pack == "first_fit") p.negotiator.pack_policy = PackPolicy::FirstFit;
    else c.bad(path + ".pack_policy", "expected best_fit|worst_fit|first_fit");
    if (j.is_object() && j.contains("class_priority")) {
        if (!j["class_priority"].is_array() || j["class_priority"].size() != 3) {
            c.bad(path + ".class_priority", "expected an array of the three job classes");
        } else {
            for (std::size_t i = 0; i < 3; ++i) {
                if (!j["class_priority"][i].is_string()) {
                    c.bad(path + ".class_priority", "expected strings");
                    break;
                }
                p.negotiator.class_priority_order[i] =
                    parse_class(j["class_priority"][i].get<std::string>(),
                                path + ".class_priority", c);
            }
        }
    }
    return p;
}

LHCSchedule parse_lhc(const json& j, const std::string& path, Ctx& c) {
    c.check_keys(j, path, {"schedule", "generated"});
    LHCSchedule out;
    if (j.is_object() && j.contains("schedule")) {
        if (!j["schedule"].is_array()) {
            c.bad(path + ".schedule", "expected an array of [time, phase] pairs");
            return out;
        }
        for (const auto& e : j["schedule"]) {
            if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_string()) {
                c.bad(path + ".schedule", "expected [time, phase] pairs");
                return out;
            }
            out.transitions.push_back(
                {e[0].get<double>(), parse_phase(e[1].get<std::string>(), path + ".schedule", c)});
        }
    }
    if (j.is_object() && j.contains("generated")) {
        const json& g = j["generated"];
        std::string gp = path + ".generated";
        c.check_keys(g, gp, {"first_phase", "fill_mean_s", "interfill_mean_s"});
        GeneratedSchedule gen;
        gen.first_phase = parse_phase(c.str(g, "first_phase", gp, "interfill"), gp, c);
        gen.fill_mean_s = c.num(g, "fill_mean_s", gp, 28800);
        gen.interfill_mean_s = c.num(g, "interfill_mean_s", gp, 10800);
        out.generated = gen;
        if (!out.transitions.empty())
            c.bad(path, "give either an explicit schedule or a generator, not both");
    }
    return out;
}

DefragConfig parse_defrag(const json& j, const std::string& path, Ctx& c) {
    c.check_keys(j, path,
                 {"enabled", "interval_s", "max_concurrent_draining", "whole_slot_target",
                  "whole_threshold_cores", "rank"});
    DefragConfig d;
    d.enabled = c.boolean(j, "enabled", path, false);
    d.interval_s = c.num(j, "interval_s", path, 600);
    d.max_concurrent_draining = static_cast<int>(c.integer(j, "max_concurrent_draining", path, 2));
    d.whole_slot_target = static_cast<int>(c.integer(j, "whole_slot_target", path, 4));
    d.whole_threshold_cores = static_cast<int>(c.integer(j, "whole_threshold_cores", path, 8));
    std::string rank = c.str(j, "rank", path, "closest_to_whole");
    if (rank == "closest_to_whole") d.rank = DefragRank::ClosestToWhole;
    else if (rank == "most_fragmented") d.rank = DefragRank::MostFragmented;
    else c.bad(path + ".rank", "expected closest_to_whole|most_fragmented");
    return d;
}

JobStreamSpec parse_stream(const json& j, const std::string& path, Ctx& c) {
    c.check_keys(j, path,
                 {"name", "pool", "schedd", "class", "cores", "memory_mb", "desired_sites",
                  "requirements", "arrivals", "work"});
    JobStreamSpec s;
    s.name = c.str(j, "name", path, "", true);
    s.pool = parse_pool_id(c.str(j, "pool", path, "global"), path + ".pool", c);
    s.schedd = c.str(j, "schedd", path, "schedd");
    s.job_class = parse_class(c.str(j, "class", path, "", true), path + ".class", c);
    s.cores = static_cast<int>(c.integer(j, "cores", path, 1));
    s.memory_mb = c.integer(j, "memory_mb", path, 0);
    s.desired_sites = c.str(j, "desired_sites", path, "");
    s.requirements = c.str(j, "requirements", path, "");

    if (!j.is_object() || !j.contains("arrivals")) {
        c.bad(path, "missing required key 'arrivals'");
    } else {
        const json& a = j["arrivals"];
        std::string ap = path + ".arrivals";
        c.check_keys(a, ap, {"times_s", "poisson_rate_per_s", "start_s", "end_s", "max_count"});
        if (a.is_object() && a.contains("times_s")) {
            s.arrivals.kind = ArrivalSpec::Kind::Explicit;
            s.arrivals.times_s = c.num_list(a, "times_s", ap);
            if (a.contains("poisson_rate_per_s"))
                c.bad(ap, "give either times_s or poisson_rate_per_s, not both");
        } else {
            s.arrivals.kind = ArrivalSpec::Kind::Poisson;
            s.arrivals.rate_per_s = c.num(a, "poisson_rate_per_s", ap, 0, true);
        }
        s.arrivals.start_s = c.num(a, "start_s", ap, 0);
        s.arrivals.end_s = c.num(a, "end_s", ap, -1);
        s.arrivals.max_count = c.integer(a, "max_count", ap, 0);
    }

    if (!j.is_object() || !j.contains("work")) {
        c.bad(path, "missing required key 'work'");
    } else {
        const json& wjs = j["work"];
        std::string wp = path + ".work";
        c.check_keys(wjs, wp, {"fixed_s", "exponential_mean_s"});
        bool has_fixed = wjs.is_object() && wjs.contains("fixed_s");
        bool has_exp = wjs.is_object() && wjs.contains("exponential_mean_s");
        if (has_fixed == has_exp) {
            c.bad(wp, "give exactly one of fixed_s or exponential_mean_s");
        } else if (has_fixed) {
            s.work.kind = WorkSpec::Kind::Fixed;
            s.work.seconds = c.num(wjs, "fixed_s", wp, 3600);
        } else {
            s.work.kind = WorkSpec::Kind::ExponentialMean;
            s.work.seconds = c.num(wjs, "exponential_mean_s", wp, 3600);
        }
    }
    return s;
}

} // namespace

Scenario parse_scenario_json(const std::string& json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::parse_error& e) {
        int line = 1, col = 1;
        for (std::size_t i = 0; i + 1 < e.byte && i < json_text.size(); ++i) {
            if (json_text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw ScenarioParseError(e.what(), line, col);
    }

    Ctx c;
    c.check_keys(root, "$",
                 {"name", "seed", "duration_s", "metrics_interval_s", "machines",
                  "unhealthy_fraction", "provisioning", "pools", "site_pools", "migrations", "lhc",
                  "defrag", "workload"});

    Scenario s;
    s.name = c.str(root, "name", "$", "");
    s.seed = static_cast<std::uint64_t>(c.integer(root, "seed", "$", 0, true));
    s.duration_s = c.num(root, "duration_s", "$", 0, true);
    s.metrics_interval_s = c.num(root, "metrics_interval_s", "$", 300);
    s.unhealthy_fraction = c.num(root, "unhealthy_fraction", "$", 0);

    if (root.is_object() && root.contains("machines")) {
        const json& m = root["machines"];
        if (m.is_array()) {
            for (std::size_t i = 0; i < m.size(); ++i)
                s.machines.push_back(
                    parse_machine_group(m[i], "$.machines[" + std::to_string(i) + "]", c));
        } else {
            s.machines.push_back(parse_machine_group(m, "$.machines", c));
        }
    } else {
        c.bad("$", "missing required key 'machines'");
    }

    if (root.is_object() && root.contains("provisioning"))
        s.provisioning = parse_provisioning(root["provisioning"], "$.provisioning", c);
    else
        c.bad("$", "missing required key 'provisioning'");

    if (root.is_object() && root.contains("pools")) {
        if (!root["pools"].is_array()) {
            c.bad("$.pools", "expected an array");
        } else {
            for (std::size_t i = 0; i < root["pools"].size(); ++i)
                s.pools.push_back(
                    parse_pool(root["pools"][i], "$.pools[" + std::to_string(i) + "]", c));
        }
    } else {
        c.bad("$", "missing required key 'pools'");
    }

    if (root.is_object() && root.contains("site_pools")) {
        if (!root["site_pools"].is_object()) {
            c.bad("$.site_pools", "expected an object of site -> pool");
        } else {
            for (const auto& [site, pid] : root["site_pools"].items()) {
                if (!pid.is_string()) {
                    c.bad("$.site_pools." + site, "expected a pool name");
                    continue;
                }
                s.site_pools[site] =
                    parse_pool_id(pid.get<std::string>(), "$.site_pools." + site, c);
            }
        }
    }

    if (root.is_object() && root.contains("migrations")) {
        if (!root["migrations"].is_array()) {
            c.bad("$.migrations", "expected an array");
        } else {
            for (std::size_t i = 0; i < root["migrations"].size(); ++i) {
                const json& m = root["migrations"][i];
                std::string mp = "$.migrations[" + std::to_string(i) + "]";
                c.check_keys(m, mp, {"time_s", "site", "from", "to"});
                MigrationSpec spec;
                spec.time_s = c.num(m, "time_s", mp, 0, true);
                spec.site = c.str(m, "site", mp, "", true);
                spec.from = parse_pool_id(c.str(m, "from", mp, "", true), mp + ".from", c);
                spec.to = parse_pool_id(c.str(m, "to", mp, "", true), mp + ".to", c);
                s.migrations.push_back(spec);
            }
        }
    }

    if (root.is_object() && root.contains("lhc")) s.lhc = parse_lhc(root["lhc"], "$.lhc", c);
    if (s.lhc.transitions.empty() && !s.lhc.generated)
        s.lhc.transitions = {{0, Phase::Interfill}};

    if (root.is_object() && root.contains("defrag"))
        s.defrag = parse_defrag(root["defrag"], "$.defrag", c);

    if (root.is_object() && root.contains("workload")) {
        if (!root["workload"].is_array()) {
            c.bad("$.workload", "expected an array");
        } else {
            for (std::size_t i = 0; i < root["workload"].size(); ++i)
                s.workload.push_back(
                    parse_stream(root["workload"][i], "$.workload[" + std::to_string(i) + "]", c));
        }
    }

    if (!c.violations.empty()) throw ScenarioValidationError(std::move(c.violations));
    validate_scenario(s);
    return s;
}

Scenario load_scenario(const std::string& name_or_path) {
    if (std::filesystem::exists(name_or_path)) {
        std::ifstream f(name_or_path, std::ios::binary);
        if (!f) throw SimError(ErrorKind::IoError, "cannot open " + name_or_path);
        std::ostringstream buf;
        buf << f.rdbuf();
        return parse_scenario_json(buf.str());
    }
    if (is_preset(name_or_path)) return load_preset(name_or_path);
    throw SimError(ErrorKind::IoError,
                   "no scenario file or preset named '" + name_or_path + "'");
}

Scenario load_preset(const std::string& name) { return parse_scenario_json(preset_json(name)); }

} // namespace farmsim
