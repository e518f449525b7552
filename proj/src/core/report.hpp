#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace tutti {

struct RequestRecord {
    uint64_t id = 0;
    double arrival_s = 0;
    double queue_wait_s = 0;
    double ttft_s = 0;
    double prefill_compute_s = 0;
    double bubble_s = 0;
    double itl_mean_s = 0;
    double done_s = 0;
    uint64_t prompt_tokens = 0;
    uint64_t output_tokens = 0;
    uint64_t hbm_hit_tokens = 0;
    uint64_t dram_hit_tokens = 0;
    uint64_t ssd_hit_tokens = 0;
};

struct DeviceStats {
    int device = 0;
    double bytes_read = 0;
    double bytes_written = 0;
    double read_active_s = 0;
    double write_active_s = 0;
    double mixed_active_s = 0;
    double peak_bw = 0;
};

struct SimReport {
    std::string mode;
    uint64_t seed = 0;
    double wall_s = 0;
    double total_compute_s = 0;
    double total_bubble_s = 0;
    uint64_t total_output_tokens = 0;
    uint64_t immediate_read_overflows = 0;
    uint64_t rw_overlap_events = 0;
    uint64_t event_log_hash = 0;
    std::vector<RequestRecord> requests;
    std::vector<DeviceStats> devices;
    std::string device_timeline_csv;

    std::string to_json() const;
};

} // namespace tutti
