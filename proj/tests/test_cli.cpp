#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include <json.hpp>

#ifndef TUTTI_CLI_PATH
#error "TUTTI_CLI_PATH must be defined by the build"
#endif

namespace {

struct RunResult {
    int exit_code = -1;
    std::string out;
};

RunResult run_cli(const std::string& args) {
    std::string cmd = std::string(TUTTI_CLI_PATH) + " " + args + " 2>/dev/null";
    FILE* p = popen(cmd.c_str(), "r");
    REQUIRE(p != nullptr);
    RunResult r;
    std::array<char, 4096> buf;
    size_t n;
    while ((n = fread(buf.data(), 1, buf.size(), p)) > 0) r.out.append(buf.data(), n);
    int st = pclose(p);
    r.exit_code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
    return r;
}

const char* kSmallOverrides =
    " --override model.num_layers=8 --override workload.rate_rps=2"
    " --override workload.duration_s=2 --override workload.len_a=2048"
    " --override workload.len_b=4096 --override workload.output_tokens=8"
    " --override model.max_input_tokens=8192 --override model.max_prefix_tokens=8192"
    " --override scheduler.profile_ioctx_per_iocb=64 --override tiers.forced_hit_rate=0.75";

} // namespace

TEST_CASE("footprint subcommand matches the worked example") {
    RunResult r = run_cli("footprint --cache-gib 60");
    CHECK(r.exit_code == 0);
    auto j = nlohmann::json::parse(r.out);
    CHECK(j["cache_bytes"] == 64424509440ULL);
    CHECK(j["prp_bytes"] == 4026531840ULL);
    CHECK(j["sgl_bytes"] == 15728640ULL);
    CHECK(j["ratio"] == doctest::Approx(256.0));
}

TEST_CASE("usage errors exit 2") {
    CHECK(run_cli("no-such-subcommand").exit_code == 2);
    CHECK(run_cli("").exit_code == 2);
    CHECK(run_cli("sweep --hit-rates bogus").exit_code == 2);
}

TEST_CASE("config errors exit 3") {
    CHECK(run_cli("simulate --config missing.ini").exit_code == 3);
    CHECK(run_cli(std::string("simulate") + kSmallOverrides + " --override nope.nope=1").exit_code == 3);
    CHECK(run_cli(std::string("simulate") + kSmallOverrides + " --mode warp_drive").exit_code == 3);
}

TEST_CASE("simulate emits a json report and honors --out") {
    std::string args = std::string("simulate --mode tutti") + kSmallOverrides;
    RunResult r = run_cli(args);
    REQUIRE(r.exit_code == 0);
    auto j = nlohmann::json::parse(r.out);
    CHECK(j["mode"] == "tutti");
    CHECK(j["requests"].size() > 0);

    RunResult f = run_cli(args + " --out cli_report_test.json");
    CHECK(f.exit_code == 0);
    std::ifstream in("cli_report_test.json");
    REQUIRE(in.good());
    nlohmann::json j2;
    in >> j2;
    CHECK(j2["mode"] == "tutti");
    in.close();
    std::remove("cli_report_test.json");
}

TEST_CASE("simulate is deterministic (golden behavior)") {
    std::string args = std::string("simulate --mode ssd") + kSmallOverrides;
    RunResult a = run_cli(args);
    RunResult b = run_cli(args);
    CHECK(a.exit_code == 0);
    CHECK(a.out == b.out);
}

TEST_CASE("gen-trace then simulate --trace replays the same workload") {
    RunResult g = run_cli(std::string("gen-trace") + kSmallOverrides + " --out cli_trace_test.jsonl");
    REQUIRE(g.exit_code == 0);
    std::string args = std::string("simulate --mode tutti --trace cli_trace_test.jsonl") + kSmallOverrides;
    RunResult fromfile = run_cli(args);
    RunResult generated = run_cli(std::string("simulate --mode tutti") + kSmallOverrides);
    CHECK(fromfile.exit_code == 0);
    CHECK(fromfile.out == generated.out);
    std::remove("cli_trace_test.jsonl");
}

TEST_CASE("sweep csv has one row per mode and point") {
    RunResult r = run_cli(std::string("sweep --modes tutti,ssd --hit-rates 0.5:1.0:0.25") +
                          kSmallOverrides);
    REQUIRE(r.exit_code == 0);
    std::istringstream is(r.out);
    std::string line;
    REQUIRE(std::getline(is, line));
    CHECK(line == "mode,rps_or_hitrate,ttft_mean,itl_mean,bubble_s,compute_s,cost_per_mtok");
    int rows = 0;
    while (std::getline(is, line))
        if (!line.empty()) rows++;
    CHECK(rows == 2 * 3); // {tutti, ssd} x {0.5, 0.75, 1.0}
}

TEST_CASE("profile emits a slack table") {
    RunResult r = run_cli(std::string("profile") + kSmallOverrides);
    REQUIRE(r.exit_code == 0);
    auto j = nlohmann::json::parse(r.out);
    CHECK(j.contains("entries"));
    CHECK(j["grid_step"] == 32);
}

TEST_CASE("bench-ring subcommand") {
    RunResult r = run_cli("bench-ring --depth 32 --ops 5000 --threads 2 --seed 3");
    REQUIRE(r.exit_code == 0);
    auto j = nlohmann::json::parse(r.out);
    CHECK(j["verified"] == true);
    CHECK(j["ops"] == 5000);
}

TEST_CASE("TUTTI_SIM_LOG env writes the event log") {
    std::string cmd = std::string("TUTTI_SIM_LOG=cli_env_log_test.jsonl ") + TUTTI_CLI_PATH +
                      " simulate --mode tutti" + kSmallOverrides + " >/dev/null 2>&1";
    REQUIRE(std::system(cmd.c_str()) == 0);
    std::ifstream f("cli_env_log_test.jsonl");
    REQUIRE(f.good());
    std::string line;
    CHECK(std::getline(f, line));
    f.close();
    std::remove("cli_env_log_test.jsonl");
}
