#pragma once

#include <optional>
#include <vector>

#include "core/error.hpp"
#include "core/report.hpp"

namespace tutti {

struct CostParams {
    double p_gpu = 5.0;        // $/h per GPU
    int n_gpu = 1;
    double p_mem = 0.0088;     // $/GB/h
    double s_mem = 0;          // GB
    double p_ssd = 0.000082;   // $/GB/h
    double s_ssd = 0;          // GB
    double throughput = 1e6;   // tokens/h

    void validate() const {
        if (throughput <= 0) fail(Errc::zero_throughput, "cost model: throughput must be > 0");
        if (p_gpu < 0 || p_mem < 0 || p_ssd < 0 || n_gpu < 0 || s_mem < 0 || s_ssd < 0)
            fail(Errc::invalid_config, "cost model: prices and sizes must be >= 0");
    }
};

// Hourly compute + storage spend normalized to one million generated tokens.
double cost_per_million(const CostParams& p);

struct SeriesPoint {
    double hit_rate = 0;
    double compute_s = 0;
    double bubble_s = 0;
};

struct BubbleBreakdown {
    std::vector<SeriesPoint> points;
    std::optional<double> crossover_hit_rate; // first point where bubble exceeds compute
};

BubbleBreakdown bubble_series(std::vector<SeriesPoint> points);

double percentile_nearest_rank(std::vector<double> values, double pct);

struct Summary {
    double ttft_mean = 0;
    double ttft_p50 = 0;
    double ttft_p99 = 0;
    double itl_mean = 0;
    double bubble_total_s = 0;
    double compute_total_s = 0;
    double hbm_hit_rate = 0;
    double dram_hit_rate = 0;
    double ssd_hit_rate = 0;
    double peak_device_bw = 0;
};

Summary summarize(const SimReport& report);

} // namespace tutti
