#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>

#include <json.hpp>

#include "core/metrics.hpp"

using namespace tutti;

TEST_CASE("cost model worked example") {
    CostParams p;
    p.p_gpu = 5;
    p.n_gpu = 1;
    p.p_mem = 0.0088;
    p.s_mem = 256;
    p.p_ssd = 0.000082;
    p.s_ssd = 14336;
    p.throughput = 1e6;
    CHECK(cost_per_million(p) == doctest::Approx(8.428352).epsilon(1e-12));

    CostParams zero;
    zero.p_gpu = 5;
    zero.n_gpu = 1;
    zero.s_mem = 0;
    zero.s_ssd = 0;
    zero.throughput = 5e6;
    CHECK(cost_per_million(zero) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("cost model properties over random draws") {
    std::mt19937_64 rng(321);
    std::uniform_real_distribution<double> u(0.01, 100.0);
    for (int i = 0; i < 10000; ++i) {
        CostParams p;
        p.p_gpu = u(rng);
        p.n_gpu = 1 + int(rng() % 8);
        p.p_mem = u(rng);
        p.s_mem = u(rng);
        p.p_ssd = u(rng);
        p.s_ssd = u(rng);
        p.throughput = u(rng) * 1e5;
        double base = cost_per_million(p);
        double closed = (p.p_gpu * p.n_gpu + p.p_mem * p.s_mem + p.p_ssd * p.s_ssd) /
                        p.throughput * 1e6;
        CHECK(base == doctest::Approx(closed).epsilon(1e-9));
        // Homogeneity: doubling throughput halves cost exactly.
        CostParams fast = p;
        fast.throughput *= 2;
        CHECK(cost_per_million(fast) == doctest::Approx(base / 2).epsilon(1e-12));
        // Additivity in components.
        CostParams gpu_only = p, store_only = p;
        gpu_only.s_mem = gpu_only.s_ssd = 0;
        store_only.p_gpu = 0;
        CHECK(cost_per_million(gpu_only) + cost_per_million(store_only) ==
              doctest::Approx(base).epsilon(1e-9));
    }
    CostParams bad;
    bad.throughput = 0;
    try {
        cost_per_million(bad);
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.code() == Errc::zero_throughput);
    }
}

TEST_CASE("crossover interpolation") {
    BubbleBreakdown b = bubble_series({{0.5, 10, 5}, {1.0, 10, 15}});
    REQUIRE(b.crossover_hit_rate.has_value());
    CHECK(*b.crossover_hit_rate == doctest::Approx(0.75).epsilon(1e-12));

    // Compute-dominated everywhere: no crossover.
    BubbleBreakdown none = bubble_series({{0.1, 10, 1}, {0.9, 10, 9}});
    CHECK(!none.crossover_hit_rate.has_value());

    // Already crossed at the first point.
    BubbleBreakdown first = bubble_series({{0.2, 1, 5}, {0.8, 1, 9}});
    REQUIRE(first.crossover_hit_rate.has_value());
    CHECK(*first.crossover_hit_rate == doctest::Approx(0.2));

    // Input order does not matter.
    BubbleBreakdown rev = bubble_series({{1.0, 10, 15}, {0.5, 10, 5}});
    CHECK(*rev.crossover_hit_rate == doctest::Approx(0.75));

    try {
        bubble_series({});
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.code() == Errc::empty_series);
    }
}

TEST_CASE("nearest-rank percentiles") {
    std::vector<double> v{5, 1, 4, 2, 3};
    CHECK(percentile_nearest_rank(v, 50) == 3);
    CHECK(percentile_nearest_rank(v, 99) == 5);
    CHECK(percentile_nearest_rank(v, 1) == 1);
    // Permutation independence.
    std::mt19937_64 rng(8);
    std::vector<double> big;
    for (int i = 0; i < 1000; ++i) big.push_back(double(rng() % 100000));
    double p99 = percentile_nearest_rank(big, 99);
    std::shuffle(big.begin(), big.end(), rng);
    CHECK(percentile_nearest_rank(big, 99) == p99);
}

TEST_CASE("summarize aggregates request records") {
    SimReport rep;
    RequestRecord a;
    a.ttft_s = 2.0;
    a.itl_mean_s = 1.0;
    a.output_tokens = 4;
    a.prompt_tokens = 100;
    a.hbm_hit_tokens = 25;
    a.ssd_hit_tokens = 50;
    a.bubble_s = 0.5;
    a.prefill_compute_s = 1.5;
    RequestRecord b = a;
    b.ttft_s = 4.0;
    b.output_tokens = 1; // no decode steps, excluded from ITL
    rep.requests = {a, b};
    DeviceStats d;
    d.peak_bw = 123;
    rep.devices = {d};
    Summary s = summarize(rep);
    CHECK(s.ttft_mean == doctest::Approx(3.0));
    CHECK(s.itl_mean == doctest::Approx(1.0));
    CHECK(s.bubble_total_s == doctest::Approx(1.0));
    CHECK(s.compute_total_s == doctest::Approx(3.0));
    CHECK(s.hbm_hit_rate == doctest::Approx(0.25));
    CHECK(s.ssd_hit_rate == doctest::Approx(0.5));
    CHECK(s.peak_device_bw == 123);

    // Single request: mean TTFT is that request's TTFT.
    rep.requests = {a};
    CHECK(summarize(rep).ttft_mean == doctest::Approx(2.0));

    std::string json = rep.to_json();
    auto j = nlohmann::json::parse(json);
    CHECK(j["summary"]["ttft_mean"] == doctest::Approx(2.0));
    CHECK(j["requests"].size() == 1);
}
