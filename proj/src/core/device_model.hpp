#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "core/error.hpp"
#include "core/gio_uring.hpp"

namespace tutti {

struct DeviceConfig {
    double read_bw = 29e9;  // bytes/s
    double write_bw = 12e9; // bytes/s
    double base_latency = 50e-6;
    double contention_factor = 0.4; // aggregate multiplier under mixed read/write
    int num_queues = 32;
    int max_queues = 256;

    void validate() const {
        if (read_bw <= 0 || write_bw <= 0) fail(Errc::invalid_config, "device bandwidths must be > 0");
        if (contention_factor <= 0 || contention_factor > 1)
            fail(Errc::invalid_config, "contention_factor must be in (0, 1]");
        if (base_latency < 0) fail(Errc::invalid_config, "base_latency must be >= 0");
    }
};

struct TimelinePoint {
    double time = 0;
    double read_bytes_in_flight = 0;
    double write_bytes_in_flight = 0;
    double effective_bw = 0;
};

// Processor-sharing SSD model. Reads alone share read_bw equally, writes
// alone share write_bw; under mixed traffic the aggregate collapses to
// contention_factor * (read_bw + write_bw), split across directions in
// proportion to outstanding bytes and equally within a direction. All
// in-flight deadlines are recomputed on every arrival and departure.
class Device {
public:
    Device(DeviceConfig cfg, int id = 0);

    int id() const { return id_; }
    const DeviceConfig& config() const { return cfg_; }

    // Starts service immediately; the completion event the caller should
    // schedule is service end + base_latency.
    void submit(uint64_t flow_id, IoKind kind, double bytes, double now);

    // Earliest in-flight service end, if any.
    std::optional<double> next_service_end() const;

    // Advance to time t and return flows whose service ends at (or before) t.
    std::vector<uint64_t> advance_to(double t);

    size_t in_flight() const { return flows_.size(); }
    double bytes_in_flight(IoKind kind) const;

    // Utilization accounting.
    double bytes_moved(IoKind kind) const { return moved_[int(kind)]; }
    double active_time(IoKind kind) const { return active_[int(kind)]; }
    double mixed_time() const { return mixed_time_; }
    double peak_bw() const { return peak_bw_; }

    const std::vector<TimelinePoint>& timeline() const { return timeline_; }
    static std::string timeline_csv_header();
    std::string timeline_csv() const;

private:
    struct Flow {
        uint64_t id;
        IoKind kind;
        double remaining;
        double rate;
    };

    void progress_to(double t);
    void recompute_rates();

    DeviceConfig cfg_;
    int id_;
    double last_t_ = 0;
    std::vector<Flow> flows_;
    double moved_[2] = {0, 0};
    double active_[2] = {0, 0};
    double mixed_time_ = 0;
    double peak_bw_ = 0;
    std::vector<TimelinePoint> timeline_;
};

struct QueueRange {
    int gpu = 0;
    int first = 0;
    int count = 0;
};

// Fails with QueueExhausted when n_gpus * queues_per_gpu > max_queues.
std::vector<QueueRange> provision_queues(int n_gpus, int queues_per_gpu, int max_queues);

} // namespace tutti
