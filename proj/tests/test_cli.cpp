// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "farmsim/metrics.hpp"

namespace {

struct CliResult {
    int exit_code;
    std::string out;
};

CliResult run_cli(const std::string& args) {
    std::string cmd = std::string(FARMSIM_CLI_PATH) + " " + args + " 2>&1";
    std::array<char, 4096> buf{};
    std::string out;
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    while (std::fgets(buf.data(), buf.size(), pipe)) out += buf.data();
    int status = pclose(pipe);
    return {WEXITSTATUS(status), out};
}

std::string write_tmp_scenario(const std::string& name, const std::string& patch_from_preset,
                               double duration) {
    // shrink a preset so cli runs stay fast
    std::string src = std::string(FARMSIM_SCENARIO_DIR) + "/" + patch_from_preset + ".json";
    std::ifstream in(src);
    REQUIRE(in.good());
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    auto pos = text.find("\"duration_s\": 604800");
    REQUIRE(pos != std::string::npos);
    text.replace(pos, std::string("\"duration_s\": 604800").size(),
                 "\"duration_s\": " + std::to_string(static_cast<long long>(duration)));
    std::string path = "cli_" + name + ".json";
    std::ofstream out(path);
    out << text;
    return path;
}

} // namespace

TEST_CASE("eval-expr prints the canonical form and the value") {
    CliResult r = run_cli(
        "eval-expr --expr \"ifthenelse(DESIRED_Sites is not undefined, "
        "stringListMember(GLIDEIN_CMSSite, DESIRED_Sites), undefined)\" "
        "--my DESIRED_Sites=T2_CH_CERN_P5 --target GLIDEIN_CMSSite=T2_CH_CERN_P5");
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("canonical: ifthenelse(DESIRED_Sites =!= undefined, "
                     "stringListMember(GLIDEIN_CMSSite, DESIRED_Sites), undefined)") !=
          std::string::npos);
    CHECK(r.out.find("value: true") != std::string::npos);

    // guard undefined -> undefined
    CliResult r2 = run_cli(
        "eval-expr --expr \"ifthenelse(DESIRED_Sites is not undefined, "
        "stringListMember(GLIDEIN_CMSSite, DESIRED_Sites), undefined)\" "
        "--target GLIDEIN_CMSSite=T2_CH_CERN_P5");
    CHECK(r2.out.find("value: undefined") != std::string::npos);

    // slot-side policy with the site identical and no agent name
    CliResult r3 = run_cli(
        "eval-expr --expr \"(GLIDEIN_CMSSite =!= 'T2_CH_CERN_P5' || "
        "WMAgent_AgentName =!= UNDEFINED)\" --my GLIDEIN_CMSSite=T2_CH_CERN_P5");
    CHECK(r3.exit_code == 0);
    CHECK(r3.out.find("value: false") != std::string::npos);

    CliResult r4 = run_cli("eval-expr --expr \"stringListMember('B', 'A, B ,C')\"");
    CHECK(r4.out.find("value: true") != std::string::npos);
}

TEST_CASE("exit codes: 2 for bad input, 0 for success") {
    CHECK(run_cli("eval-expr --expr \"1 +\"").exit_code == 2);
    CHECK(run_cli("run --scenario does_not_exist.json --out cli_out_none").exit_code != 0);

    // a scenario with an unknown key fails validation with exit code 2
    std::ofstream bad("cli_bad.json");
    bad << "{\"seed\":1,\"duration_s\":100,\"machines\":{\"site\":\"X\"},"
        << "\"provisioning\":{\"model\":\"vacuum_glidein\"},"
        << "\"pools\":[{\"id\":\"global\"}],\"workloads\":[]}";
    bad.close();
    CliResult r = run_cli("run --scenario cli_bad.json --out cli_out_bad");
    CHECK(r.exit_code == 2);
    CHECK(r.out.find("unknown key 'workloads'") != std::string::npos);
    std::remove("cli_bad.json");
}

TEST_CASE("run writes series, summary and trace; reruns are byte-identical") {
    std::string sc = write_tmp_scenario("run", "p5_vacuum", 43200);
    CliResult r1 = run_cli("run --scenario " + sc + " --out cli_out1");
    REQUIRE(r1.exit_code == 0);
    CliResult r2 = run_cli("run --scenario " + sc + " --out cli_out2");
    REQUIRE(r2.exit_code == 0);

    auto slurp = [](const std::string& p) {
        std::ifstream f(p, std::ios::binary);
        REQUIRE(f.good());
        return std::string((std::istreambuf_iterator<char>(f)),
                           std::istreambuf_iterator<char>());
    };
    CHECK(slurp("cli_out1/series.csv") == slurp("cli_out2/series.csv"));
    CHECK(slurp("cli_out1/trace.csv") == slurp("cli_out2/trace.csv"));
    CHECK(slurp("cli_out1/summary.json") == slurp("cli_out2/summary.json"));

    auto samples = farmsim::read_metrics_csv("cli_out1/series.csv");
    CHECK(samples.size() == 145); // 43200/300 + 1

    // json format produces the single-object form
    CliResult r3 = run_cli("run --scenario " + sc + " --format json --out cli_out3");
    REQUIRE(r3.exit_code == 0);
    auto series = farmsim::read_metrics_json("cli_out3/metrics.json");
    CHECK(series.samples == samples);

    for (const char* d : {"cli_out1", "cli_out2", "cli_out3"})
        std::filesystem::remove_all(d);
    std::remove(sc.c_str());
}

TEST_CASE("compare runs both scenarios on one seed and writes a report") {
    std::string a = write_tmp_scenario("cmp_a", "hlt_run2_static", 43200);
    std::string b = write_tmp_scenario("cmp_b", "p5_vacuum", 43200);
    CliResult r = run_cli("compare --a " + a + " --b " + b + " --seed 7 --out cli_cmp");
    REQUIRE(r.exit_code == 0);
    std::ifstream f("cli_cmp/report.json");
    REQUIRE(f.good());
    std::string report((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    CHECK(report.find("\"delta\"") != std::string::npos);
    CHECK(report.find("hlt_run2_static") != std::string::npos);
    CHECK(report.find("p5_vacuum") != std::string::npos);
    std::filesystem::remove_all("cli_cmp");
    std::remove(a.c_str());
    std::remove(b.c_str());
}
