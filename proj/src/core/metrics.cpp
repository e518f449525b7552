#include "core/metrics.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

namespace tutti {

double cost_per_million(const CostParams& p) {
    p.validate();
    double hourly = p.p_gpu * p.n_gpu + p.p_mem * p.s_mem + p.p_ssd * p.s_ssd;
    return hourly / p.throughput * 1e6;
}

BubbleBreakdown bubble_series(std::vector<SeriesPoint> points) {
    if (points.empty()) fail(Errc::empty_series, "bubble_series: empty input");
    std::stable_sort(points.begin(), points.end(),
                     [](const SeriesPoint& a, const SeriesPoint& b) { return a.hit_rate < b.hit_rate; });
    BubbleBreakdown out;
    out.points = points;
    for (size_t i = 0; i < points.size(); ++i) {
        double diff = points[i].bubble_s - points[i].compute_s;
        if (diff > 0) {
            if (i == 0) {
                out.crossover_hit_rate = points[0].hit_rate;
            } else {
                double prev = points[i - 1].bubble_s - points[i - 1].compute_s;
                // Linear interpolation of bubble - compute between grid points.
                double frac = prev < 0 ? (-prev) / (diff - prev) : 0;
                out.crossover_hit_rate =
                    points[i - 1].hit_rate + frac * (points[i].hit_rate - points[i - 1].hit_rate);
            }
            break;
        }
    }
    return out;
}

double percentile_nearest_rank(std::vector<double> values, double pct) {
    if (values.empty()) return 0;
    std::sort(values.begin(), values.end());
    size_t rank = size_t(std::ceil(pct / 100.0 * double(values.size())));
    rank = std::clamp<size_t>(rank, 1, values.size());
    return values[rank - 1];
}

Summary summarize(const SimReport& report) {
    Summary s;
    std::vector<double> ttfts;
    double itl_sum = 0;
    size_t itl_n = 0;
    double prompt_total = 0, hbm = 0, dram = 0, ssd = 0;
    for (const RequestRecord& r : report.requests) {
        ttfts.push_back(r.ttft_s);
        if (r.output_tokens > 1) {
            itl_sum += r.itl_mean_s;
            itl_n++;
        }
        s.bubble_total_s += r.bubble_s;
        s.compute_total_s += r.prefill_compute_s;
        prompt_total += double(r.prompt_tokens);
        hbm += double(r.hbm_hit_tokens);
        dram += double(r.dram_hit_tokens);
        ssd += double(r.ssd_hit_tokens);
    }
    if (!ttfts.empty()) {
        double sum = 0;
        for (double t : ttfts) sum += t;
        s.ttft_mean = sum / double(ttfts.size());
        s.ttft_p50 = percentile_nearest_rank(ttfts, 50);
        s.ttft_p99 = percentile_nearest_rank(ttfts, 99);
    }
    s.itl_mean = itl_n ? itl_sum / double(itl_n) : 0;
    if (prompt_total > 0) {
        s.hbm_hit_rate = hbm / prompt_total;
        s.dram_hit_rate = dram / prompt_total;
        s.ssd_hit_rate = ssd / prompt_total;
    }
    for (const DeviceStats& d : report.devices) s.peak_device_bw = std::max(s.peak_device_bw, d.peak_bw);
    return s;
}

std::string SimReport::to_json() const {
    nlohmann::ordered_json j;
    j["mode"] = mode;
    j["seed"] = seed;
    j["wall_s"] = wall_s;
    j["total_compute_s"] = total_compute_s;
    j["total_bubble_s"] = total_bubble_s;
    j["total_output_tokens"] = total_output_tokens;
    j["immediate_read_overflows"] = immediate_read_overflows;
    j["rw_overlap_events"] = rw_overlap_events;
    j["event_log_hash"] = event_log_hash;
    Summary s = summarize(*this);
    j["summary"] = {{"ttft_mean", s.ttft_mean},   {"ttft_p50", s.ttft_p50},
                    {"ttft_p99", s.ttft_p99},     {"itl_mean", s.itl_mean},
                    {"bubble_total_s", s.bubble_total_s}, {"compute_total_s", s.compute_total_s},
                    {"hbm_hit_rate", s.hbm_hit_rate},     {"dram_hit_rate", s.dram_hit_rate},
                    {"ssd_hit_rate", s.ssd_hit_rate},     {"peak_device_bw", s.peak_device_bw}};
    auto reqs = nlohmann::ordered_json::array();
    for (const RequestRecord& r : requests)
        reqs.push_back({{"id", r.id},
                        {"arrival_s", r.arrival_s},
                        {"queue_wait_s", r.queue_wait_s},
                        {"ttft_s", r.ttft_s},
                        {"prefill_compute_s", r.prefill_compute_s},
                        {"bubble_s", r.bubble_s},
                        {"itl_mean_s", r.itl_mean_s},
                        {"done_s", r.done_s},
                        {"prompt_tokens", r.prompt_tokens},
                        {"output_tokens", r.output_tokens},
                        {"hbm_hit_tokens", r.hbm_hit_tokens},
                        {"dram_hit_tokens", r.dram_hit_tokens},
                        {"ssd_hit_tokens", r.ssd_hit_tokens}});
    j["requests"] = std::move(reqs);
    auto devs = nlohmann::ordered_json::array();
    for (const DeviceStats& d : devices)
        devs.push_back({{"device", d.device},
                        {"bytes_read", d.bytes_read},
                        {"bytes_written", d.bytes_written},
                        {"read_active_s", d.read_active_s},
                        {"write_active_s", d.write_active_s},
                        {"mixed_active_s", d.mixed_active_s},
                        {"peak_bw", d.peak_bw}});
    j["devices"] = std::move(devs);
    return j.dump(2);
}

} // namespace tutti
