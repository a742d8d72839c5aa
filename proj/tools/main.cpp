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

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "farmsim/engine.hpp"
#include "farmsim/errors.hpp"
#include "farmsim/expr.hpp"
#include "farmsim/metrics.hpp"
#include "farmsim/scenario_io.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitValidation = 2;
constexpr int kExitInvariant = 3;

void write_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw farmsim::SimError(farmsim::ErrorKind::IoError, "cannot open " + path);
    f << content;
    if (!f) throw farmsim::SimError(farmsim::ErrorKind::IoError, "write failed: " + path);
}

farmsim::expr::AttributeSet parse_ad(const std::vector<std::string>& kvs) {
    farmsim::expr::AttributeSet ad;
    for (const auto& kv : kvs) {
        auto eq = kv.find('=');
        if (eq == std::string::npos)
            throw farmsim::SimError(farmsim::ErrorKind::ScenarioInvalid,
                                    "attribute must be name=value: " + kv);
        ad.set(kv.substr(0, eq), farmsim::expr::parse_scalar(kv.substr(eq + 1)));
    }
    return ad;
}

int cmd_run(const std::string& scenario_arg, std::optional<std::uint64_t> seed,
            const std::string& out_dir, const std::string& format) {
    farmsim::Scenario sc = farmsim::load_scenario(scenario_arg);
    farmsim::RunResult r = seed ? farmsim::run(sc, *seed) : farmsim::run(sc);

    std::filesystem::create_directories(out_dir);
    if (format == "json") {
        farmsim::write_metrics_json(r.metrics, out_dir + "/metrics.json");
    } else {
        farmsim::write_metrics_csv(r.metrics, out_dir + "/series.csv");
        farmsim::write_summary_json(r.metrics.summary, out_dir + "/summary.json");
    }
    write_file(out_dir + "/trace.csv", r.trace.to_csv());

    const auto& s = r.metrics.summary;
    std::printf("scenario %s seed %llu: %lld jobs submitted, %lld completed, %lld failed\n",
                s.scenario_name.c_str(), static_cast<unsigned long long>(s.seed),
                static_cast<long long>(s.jobs_submitted), static_cast<long long>(s.jobs_completed),
                static_cast<long long>(s.jobs_failed));
    for (const auto& [cls, lat] : s.latency_by_class)
        if (lat.started > 0)
            std::printf("  %-11s started %lld/%lld  latency p50 %.0fs p95 %.0fs\n", cls.c_str(),
                        static_cast<long long>(lat.started),
                        static_cast<long long>(lat.submitted), lat.p50, lat.p95);
    std::printf("outputs in %s\n", out_dir.c_str());
    return kExitOk;
}

int cmd_compare(const std::string& a_arg, const std::string& b_arg, std::uint64_t seed,
                const std::string& out_dir) {
    farmsim::Scenario a = farmsim::load_scenario(a_arg);
    farmsim::Scenario b = farmsim::load_scenario(b_arg);
    farmsim::ComparisonReport rep = farmsim::compare(a, b, seed);

    std::filesystem::create_directories(out_dir);
    write_file(out_dir + "/report.json", rep.to_json());

    auto line = [](const char* label, const farmsim::MetricsSummary& s) {
        std::printf("%-4s %-24s jobs %lld/%lld done, failures", label, s.scenario_name.c_str(),
                    static_cast<long long>(s.jobs_completed),
                    static_cast<long long>(s.jobs_submitted));
        for (const auto& [k, v] : s.failures)
            if (v) std::printf(" %s=%lld", k.c_str(), static_cast<long long>(v));
        std::printf("\n");
        for (const auto& [cls, lat] : s.latency_by_class)
            if (lat.started)
                std::printf("       %-11s p50 %.0fs p95 %.0fs\n", cls.c_str(), lat.p50, lat.p95);
    };
    line("a:", rep.summary_a);
    line("b:", rep.summary_b);
    std::printf("report in %s/report.json\n", out_dir.c_str());
    return kExitOk;
}

int cmd_eval_expr(const std::string& source, const std::vector<std::string>& my_kvs,
                  const std::vector<std::string>& target_kvs) {
    farmsim::expr::ExprPtr e = farmsim::expr::parse(source);
    farmsim::expr::AttributeSet my = parse_ad(my_kvs);
    farmsim::expr::AttributeSet target = parse_ad(target_kvs);
    farmsim::expr::Value v = farmsim::expr::evaluate(e, my, target);
    std::printf("canonical: %s\n", farmsim::expr::pretty_print(e).c_str());
    std::printf("value: %s\n", farmsim::expr::to_string(v).c_str());
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"farmsim - discrete-event simulator of pilot-provisioned batch pools"};
    app.require_subcommand(1);

    std::string scenario_arg, out_dir = "out", format = "csv";
    std::optional<std::uint64_t> seed_opt;
    auto* run_cmd = app.add_subcommand("run", "run one scenario and export metrics");
    run_cmd->add_option("--scenario", scenario_arg, "scenario file or preset name")->required();
    run_cmd->add_option("--seed", seed_opt, "override the scenario seed");
    run_cmd->add_option("--out", out_dir, "output directory");
    run_cmd->add_option("--format", format, "csv|json")
        ->check(CLI::IsMember({"csv", "json"}));

    std::string a_arg, b_arg, cmp_out = "out";
    std::uint64_t cmp_seed = 0;
    auto* cmp_cmd = app.add_subcommand("compare", "run two scenarios with one seed and diff them");
    cmp_cmd->add_option("--a", a_arg, "first scenario file or preset")->required();
    cmp_cmd->add_option("--b", b_arg, "second scenario file or preset")->required();
    cmp_cmd->add_option("--seed", cmp_seed, "seed for both runs")->required();
    cmp_cmd->add_option("--out", cmp_out, "output directory");

    std::string expr_source;
    std::vector<std::string> my_kvs, target_kvs;
    auto* eval_cmd = app.add_subcommand("eval-expr", "evaluate a policy expression over two ads");
    eval_cmd->add_option("--expr", expr_source, "expression source")->required();
    eval_cmd->add_option("--my", my_kvs, "MY-side attribute, name=value (repeatable)");
    eval_cmd->add_option("--target", target_kvs, "TARGET-side attribute, name=value (repeatable)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run_cmd->parsed()) return cmd_run(scenario_arg, seed_opt, out_dir, format);
        if (cmp_cmd->parsed()) return cmd_compare(a_arg, b_arg, cmp_seed, cmp_out);
        if (eval_cmd->parsed()) return cmd_eval_expr(expr_source, my_kvs, target_kvs);
    } catch (const farmsim::InvariantViolation& e) {
        std::fprintf(stderr, "invariant violation: %s\n", e.what());
        return kExitInvariant;
    } catch (const farmsim::ScenarioParseError& e) {
        std::fprintf(stderr, "scenario parse error at line %d, column %d: %s\n", e.line(),
                     e.column(), e.what());
        return kExitValidation;
    } catch (const farmsim::ScenarioValidationError& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return kExitValidation;
    } catch (const farmsim::expr::SyntaxError& e) {
        std::fprintf(stderr, "expression error: %s\n", e.what());
        return kExitValidation;
    } catch (const farmsim::SimError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return e.kind() == farmsim::ErrorKind::ScenarioInvalid ? kExitValidation : kExitError;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitError;
    }
    return kExitOk;
}
