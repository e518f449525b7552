#pragma once

#include <cstdint>
#include <string>

#include "core/compute_profile.hpp"
#include "core/device_model.hpp"
#include "core/error.hpp"
#include "core/metrics.hpp"
#include "core/object_store.hpp"
#include "core/workload.hpp"

namespace tutti {

enum class BackendMode { HbmOnly, DramLw, SsdBaseline, GdsLike, Tutti };

std::string mode_name(BackendMode m);
BackendMode mode_from_name(const std::string& name);

// Whole-simulation configuration, loadable from an INI-style file with
// [model] [devices] [tiers] [scheduler] [workload] [mode] sections.
// Unknown sections or keys are rejected.
struct SimConfig {
    // [model]
    ModelConfig model = [] {
        ModelConfig m;
        m.phases = default_phases();
        return m;
    }();
    int block_tokens = 64;
    int grid_step = 32;
    int max_input_tokens = 131072;
    int max_prefix_tokens = 131072;

    // [devices]
    int num_devices = 2;
    DeviceConfig device;
    double dram_bw = 50e9;
    double dram_base_latency = 10e-6;
    int n_gpus = 1;
    int queues_per_gpu = 32;

    // [tiers] capacities in tokens; forced_hit_rate >= 0 imposes the hit
    // fraction directly on the mode's natural tier (ablation style).
    uint64_t hbm_tokens = 65536;
    uint64_t dram_tokens = 262144;
    uint64_t ssd_tokens = 8388608;
    double forced_hit_rate = -1;
    double remote_tier_latency_s = 0; // reserved hook, not simulated

    // [scheduler]
    int ring_depth = 256;
    int ioctx_per_iocb = 2048;
    int io_sm_per_iocb = 2;
    int io_max_sms = 8;
    int profile_ioctx_per_iocb = 512; // typical batch size used for the offline I/O profile
    uint64_t deferred_write_cap = 4096;

    // [mode]
    BackendMode mode = BackendMode::Tutti;
    double cpu_submit_latency = 10e-6; // per chunked I/O, SsdBaseline / GdsLike
    double layer_launch_cost = 5e-6;   // per layer, Tutti / DramLw
    int chunk_tokens = 256;

    // [workload]
    TraceSpec trace;

    // [cost]
    CostParams cost;

    uint64_t seed = 1;

    uint64_t object_bytes() const {
        return uint64_t(block_tokens) * model.bytes_per_token_per_layer;
    }
    StoreConfig store_config() const;
    void validate() const;
};

SimConfig parse_config(const std::string& ini_text);
SimConfig load_config(const std::string& path);

// Dotted override, e.g. "devices.read_bw=29e9". Applied after file parse.
void apply_override(SimConfig& cfg, const std::string& key_eq_value);

std::string default_config_ini();

} // namespace tutti
