#pragma once

#include <map>
#include <string>
#include <vector>

#include "core/error.hpp"

namespace tutti {

// One operator phase inside a transformer layer. Duration is
// a + b*L_new + c*L_new*(L_prefix + L_new/2) seconds; sm_fraction is the
// fraction of streaming multiprocessors the phase occupies.
struct Phase {
    std::string name;
    double sm_fraction = 0.9;
    double a = 0;
    double b = 0;
    double c = 0;
};

struct ModelConfig {
    int num_layers = 64;
    int total_sms = 132;
    int io_reserved_sms = 2; // dedicated I/O control domain
    double io_sm_threshold = 0;
    std::vector<Phase> phases;
    double decode_d0 = 8e-3;
    double decode_d1 = 1e-8;
    double decode_sm_fraction = 0.5;
    double slack_frac = 0.3; // fraction of a decode step usable as a write window
    uint64_t bytes_per_token_per_layer = 1280;

    void validate() const {
        if (num_layers < 1 || total_sms < 1) fail(Errc::invalid_config, "model: counts must be >= 1");
        if (io_reserved_sms >= total_sms) fail(Errc::invalid_config, "io_reserved_sms must be < total_sms");
        for (const Phase& p : phases)
            if (p.sm_fraction <= 0 || p.sm_fraction > 1)
                fail(Errc::invalid_config, "phase sm_fraction must be in (0, 1]");
    }
};

std::vector<Phase> default_phases();

double phase_duration(const Phase& p, double l_new, double l_prefix);
double layer_prefill_time(const ModelConfig& cfg, double l_new, double l_prefix);
double decode_step_time(const ModelConfig& cfg, double context_len);

struct SlackWindow {
    double duration = 0;
    int sm_budget = 0;
};

struct IoKernelPoint {
    double duration = 0;
    int sm_occupancy = 0;
};

using IoKernelProfile = std::map<int, IoKernelPoint>; // iocb count -> profile

IoKernelProfile build_io_profile(int max_iocbs, double iocb_bytes, double aggregate_read_bw,
                                 double base_latency, int sm_per_iocb, int max_sms);

// Per-layer slack windows indexed by (L_input, L_prefix) on a token grid.
// Entries are precomputed over the grid when small enough and derived on
// demand (identical values, cached) otherwise; lookups round down to the
// grid and clamp to the configured maxima.
class SlackTable {
public:
    SlackTable(ModelConfig cfg, int max_input, int max_prefix, int grid_step,
               IoKernelProfile io_profile, bool precompute);

    const std::vector<SlackWindow>& lookup(int l_input, int l_prefix) const;
    int max_iocbs_for_window(const SlackWindow& w) const;

    static std::vector<SlackWindow> compute_entry(const ModelConfig& cfg, int l_input, int l_prefix);

    const ModelConfig& model() const { return cfg_; }
    const IoKernelProfile& io_profile() const { return io_profile_; }
    int grid_step() const { return grid_step_; }
    int max_input() const { return max_input_; }
    int max_prefix() const { return max_prefix_; }
    size_t entry_count() const { return entries_.size(); }

    std::string to_json() const;
    static SlackTable from_json(const std::string& text);

private:
    int snap(int v, int max) const;

    ModelConfig cfg_;
    int max_input_;
    int max_prefix_;
    int grid_step_;
    IoKernelProfile io_profile_;
    mutable std::map<std::pair<int, int>, std::vector<SlackWindow>> entries_;
};

SlackTable build_slack_table(const ModelConfig& cfg, int max_input, int max_prefix,
                             int grid_step = 32, IoKernelProfile io_profile = {});

} // namespace tutti
