#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <string>

#include "core/workload.hpp"

using namespace tutti;

namespace {

TraceSpec base_spec() {
    TraceSpec s;
    s.rate_rps = 5;
    s.duration_s = 200;
    s.length_dist = "uniform";
    s.len_a = 1000;
    s.len_b = 9000;
    s.num_groups = 4;
    s.output_tokens = 32;
    s.seed = 99;
    return s;
}

} // namespace

TEST_CASE("generation is deterministic per seed") {
    TraceSpec s = base_spec();
    auto a = gen_trace(s);
    auto b = gen_trace(s);
    CHECK(a == b);
    s.seed = 100;
    auto c = gen_trace(s);
    CHECK(a != c);
}

TEST_CASE("trace invariants") {
    TraceSpec s = base_spec();
    s.reuse_dist = "uniform";
    auto t = gen_trace(s);
    REQUIRE(t.size() > 100);
    double prev = 0;
    uint32_t expect_group = 0;
    for (const Request& r : t) {
        CHECK(r.arrival_s >= prev);
        prev = r.arrival_s;
        CHECK(r.prompt_tokens >= 1000);
        CHECK(r.prompt_tokens <= 9000);
        CHECK(r.reused_prefix_tokens <= r.prompt_tokens);
        CHECK(r.prefix_group == expect_group);
        expect_group = (expect_group + 1) % 4;
        CHECK(r.output_tokens == 32);
    }
    // Arrival count is near rate * duration for a Poisson process.
    CHECK(double(t.size()) > 0.7 * s.rate_rps * s.duration_s);
    CHECK(double(t.size()) < 1.3 * s.rate_rps * s.duration_s);
}

TEST_CASE("uniform lengths look uniform") {
    auto t = gen_trace(base_spec());
    double sum = 0;
    for (const Request& r : t) sum += double(r.prompt_tokens);
    double mean = sum / double(t.size());
    CHECK(mean > 4500);
    CHECK(mean < 5500);
}

TEST_CASE("preset length distributions respect their clamps") {
    TraceSpec s = base_spec();
    s.length_dist = "leval";
    for (const Request& r : gen_trace(s)) {
        CHECK(r.prompt_tokens >= 3000);
        CHECK(r.prompt_tokens <= 200000);
    }
    s.length_dist = "loogle";
    double sum = 0;
    auto t = gen_trace(s);
    for (const Request& r : t) {
        CHECK(r.prompt_tokens >= 60000);
        CHECK(r.prompt_tokens <= 250000);
        sum += double(r.prompt_tokens);
    }
    CHECK(sum / double(t.size()) > 100000); // very-long-context preset
    s.length_dist = "weibull";
    CHECK_THROWS_AS(gen_trace(s), Error);
}

TEST_CASE("jsonl round trip preserves every field") {
    TraceSpec s = base_spec();
    s.duration_s = 2100; // ~10^4 requests at 5 rps
    auto t = gen_trace(s);
    REQUIRE(t.size() > 9000);
    auto back = parse_trace(trace_to_jsonl(t));
    CHECK(t == back);
}

TEST_CASE("file round trip") {
    auto t = gen_trace(base_spec());
    std::string path = "trace_roundtrip_test.jsonl";
    save_trace(t, path);
    auto back = load_trace(path);
    CHECK(t == back);
    std::remove(path.c_str());
    try {
        load_trace("no_such_trace_file.jsonl");
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.code() == Errc::parse_error);
    }
}

TEST_CASE("parse errors carry the line number") {
    std::string good = "{\"arrival_s\":0.5,\"prompt_tokens\":100,\"prefix_group\":0,"
                       "\"reused_prefix_tokens\":50,\"output_tokens\":8}\n";
    std::string bad = good + good + "this is not json\n";
    try {
        parse_trace(bad);
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.code() == Errc::parse_error);
        CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
    // Semantic violations are parse errors too.
    std::string over = "{\"arrival_s\":0.5,\"prompt_tokens\":100,\"prefix_group\":0,"
                       "\"reused_prefix_tokens\":500,\"output_tokens\":8}\n";
    CHECK_THROWS_AS(parse_trace(over), Error);
    std::string backwards = good + "{\"arrival_s\":0.1,\"prompt_tokens\":100,\"prefix_group\":0,"
                                   "\"reused_prefix_tokens\":0,\"output_tokens\":8}\n";
    CHECK_THROWS_AS(parse_trace(backwards), Error);
}

TEST_CASE("spec validation") {
    TraceSpec s = base_spec();
    s.rate_rps = 0;
    CHECK_THROWS_AS(gen_trace(s), Error);
    s = base_spec();
    s.reuse_frac = 1.5;
    CHECK_THROWS_AS(gen_trace(s), Error);
}
