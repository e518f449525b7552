#include "core/compute_profile.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

namespace tutti {

std::vector<Phase> default_phases() {
    // Declared per-layer operator model: heavy GEMM/MLP phases near the
    // SM ceiling, attention scaling with prefix length, a light norm tail.
    return {
        Phase{"gemm_qkv", 0.90, 2e-6, 5e-8, 0},
        Phase{"attention", 0.40, 2e-6, 5e-8, 1e-12},
        Phase{"gemm_proj", 0.90, 2e-6, 4e-8, 0},
        Phase{"mlp", 0.90, 2e-6, 5e-8, 0},
        Phase{"norm", 0.30, 2e-6, 1e-8, 0},
    };
}

double phase_duration(const Phase& p, double l_new, double l_prefix) {
    return p.a + p.b * l_new + p.c * l_new * (l_prefix + l_new / 2.0);
}

double layer_prefill_time(const ModelConfig& cfg, double l_new, double l_prefix) {
    double t = 0;
    for (const Phase& p : cfg.phases) t += phase_duration(p, l_new, l_prefix);
    return t;
}

double decode_step_time(const ModelConfig& cfg, double context_len) {
    return cfg.decode_d0 + cfg.decode_d1 * context_len;
}

IoKernelProfile build_io_profile(int max_iocbs, double iocb_bytes, double aggregate_read_bw,
                                 double base_latency, int sm_per_iocb, int max_sms) {
    if (max_iocbs < 1 || iocb_bytes <= 0 || aggregate_read_bw <= 0)
        fail(Errc::invalid_config, "io profile: nonpositive parameters");
    IoKernelProfile p;
    for (int n = 1; n <= max_iocbs; ++n) {
        IoKernelPoint pt;
        pt.duration = base_latency + double(n) * iocb_bytes / aggregate_read_bw;
        pt.sm_occupancy = std::min(sm_per_iocb * n, max_sms);
        p[n] = pt;
    }
    return p;
}

std::vector<SlackWindow> SlackTable::compute_entry(const ModelConfig& cfg, int l_input, int l_prefix) {
    std::vector<SlackWindow> windows;
    const double headroom = double(cfg.total_sms) - cfg.io_reserved_sms - cfg.io_sm_threshold;
    double run_duration = 0;
    int run_max_occupied = 0;
    bool in_run = false;
    auto flush = [&]() {
        if (in_run && run_duration > 0)
            windows.push_back(SlackWindow{run_duration, cfg.total_sms - run_max_occupied});
        run_duration = 0;
        run_max_occupied = 0;
        in_run = false;
    };
    for (const Phase& p : cfg.phases) {
        if (p.sm_fraction * cfg.total_sms <= headroom) {
            in_run = true;
            run_duration += phase_duration(p, l_input, l_prefix);
            run_max_occupied = std::max(run_max_occupied, int(std::ceil(p.sm_fraction * cfg.total_sms)));
        } else {
            flush();
        }
    }
    flush();
    return windows;
}

SlackTable::SlackTable(ModelConfig cfg, int max_input, int max_prefix, int grid_step,
                       IoKernelProfile io_profile, bool precompute)
    : cfg_(std::move(cfg)), max_input_(max_input), max_prefix_(max_prefix), grid_step_(grid_step),
      io_profile_(std::move(io_profile)) {
    if (grid_step_ < 1) fail(Errc::invalid_config, "grid_step must be >= 1");
    if (cfg_.phases.empty()) fail(Errc::invalid_config, "slack table requires phase templates");
    cfg_.validate();
    if (precompute) {
        for (int li = 0; li <= max_input_; li += grid_step_)
            for (int lp = 0; lp <= max_prefix_; lp += grid_step_)
                entries_[{li, lp}] = compute_entry(cfg_, li, lp);
    }
}

int SlackTable::snap(int v, int max) const {
    v = std::clamp(v, 0, max);
    return (v / grid_step_) * grid_step_;
}

const std::vector<SlackWindow>& SlackTable::lookup(int l_input, int l_prefix) const {
    std::pair<int, int> key{snap(l_input, max_input_), snap(l_prefix, max_prefix_)};
    auto it = entries_.find(key);
    if (it == entries_.end())
        it = entries_.emplace(key, compute_entry(cfg_, key.first, key.second)).first;
    return it->second;
}

int SlackTable::max_iocbs_for_window(const SlackWindow& w) const {
    int best = 0;
    for (const auto& [n, pt] : io_profile_)
        if (pt.duration <= w.duration && pt.sm_occupancy <= w.sm_budget) best = std::max(best, n);
    return best;
}

std::string SlackTable::to_json() const {
    nlohmann::ordered_json j;
    j["grid_step"] = grid_step_;
    j["max_input"] = max_input_;
    j["max_prefix"] = max_prefix_;
    nlohmann::ordered_json model;
    model["num_layers"] = cfg_.num_layers;
    model["total_sms"] = cfg_.total_sms;
    model["io_reserved_sms"] = cfg_.io_reserved_sms;
    model["io_sm_threshold"] = cfg_.io_sm_threshold;
    model["decode_d0"] = cfg_.decode_d0;
    model["decode_d1"] = cfg_.decode_d1;
    model["decode_sm_fraction"] = cfg_.decode_sm_fraction;
    model["slack_frac"] = cfg_.slack_frac;
    model["bytes_per_token_per_layer"] = cfg_.bytes_per_token_per_layer;
    auto phases = nlohmann::ordered_json::array();
    for (const Phase& p : cfg_.phases)
        phases.push_back({{"name", p.name}, {"sm_fraction", p.sm_fraction}, {"a", p.a}, {"b", p.b}, {"c", p.c}});
    model["phases"] = std::move(phases);
    j["model"] = std::move(model);
    auto prof = nlohmann::ordered_json::array();
    for (const auto& [n, pt] : io_profile_)
        prof.push_back({{"iocbs", n}, {"duration", pt.duration}, {"sm_occupancy", pt.sm_occupancy}});
    j["io_kernel_profile"] = std::move(prof);
    auto entries = nlohmann::ordered_json::array();
    for (const auto& [key, windows] : entries_) {
        auto ws = nlohmann::ordered_json::array();
        for (const SlackWindow& w : windows)
            ws.push_back({{"duration", w.duration}, {"sm_budget", w.sm_budget}});
        entries.push_back({{"l_input", key.first}, {"l_prefix", key.second}, {"windows", std::move(ws)}});
    }
    j["entries"] = std::move(entries);
    return j.dump(2);
}

SlackTable SlackTable::from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        fail(Errc::table_missing, std::string("slack table unreadable: ") + e.what());
    }
    try {
        ModelConfig cfg;
        const auto& m = j.at("model");
        cfg.num_layers = m.at("num_layers");
        cfg.total_sms = m.at("total_sms");
        cfg.io_reserved_sms = m.at("io_reserved_sms");
        cfg.io_sm_threshold = m.at("io_sm_threshold");
        cfg.decode_d0 = m.at("decode_d0");
        cfg.decode_d1 = m.at("decode_d1");
        cfg.decode_sm_fraction = m.at("decode_sm_fraction");
        cfg.slack_frac = m.at("slack_frac");
        cfg.bytes_per_token_per_layer = m.at("bytes_per_token_per_layer");
        for (const auto& p : m.at("phases"))
            cfg.phases.push_back(Phase{p.at("name"), p.at("sm_fraction"), p.at("a"), p.at("b"), p.at("c")});
        IoKernelProfile prof;
        for (const auto& pt : j.at("io_kernel_profile"))
            prof[pt.at("iocbs")] = IoKernelPoint{pt.at("duration"), pt.at("sm_occupancy")};
        SlackTable t(cfg, j.at("max_input"), j.at("max_prefix"), j.at("grid_step"), std::move(prof), false);
        for (const auto& e : j.at("entries")) {
            std::vector<SlackWindow> ws;
            for (const auto& w : e.at("windows")) ws.push_back(SlackWindow{w.at("duration"), w.at("sm_budget")});
            t.entries_[{e.at("l_input"), e.at("l_prefix")}] = std::move(ws);
        }
        return t;
    } catch (const nlohmann::json::exception& e) {
        fail(Errc::table_missing, std::string("slack table schema mismatch: ") + e.what());
    }
}

SlackTable build_slack_table(const ModelConfig& cfg, int max_input, int max_prefix, int grid_step,
                             IoKernelProfile io_profile) {
    // Precompute eagerly only for grids of sane size; larger tables fall
    // back to on-demand entries with identical round-down semantics.
    uint64_t points = (uint64_t(max_input) / grid_step + 1) * (uint64_t(max_prefix) / grid_step + 1);
    return SlackTable(cfg, max_input, max_prefix, grid_step, std::move(io_profile), points <= 1u << 16);
}

} // namespace tutti
