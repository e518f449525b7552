#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "core/compute_profile.hpp"
#include "core/config.hpp"
#include "core/report.hpp"
#include "core/workload.hpp"

namespace tutti {

// Builds the offline slack table the Tutti backend consumes (the warm-up
// profiling pass); other backends ignore it.
SlackTable build_table_for(const SimConfig& cfg);

// Runs one deterministic simulation of the trace under cfg.mode. When
// `table` is null and the backend needs one, it is built from cfg.
// `trace_out`, when set, receives the event log as JSONL.
SimReport run_simulation(const SimConfig& cfg, const std::vector<Request>& trace,
                         const SlackTable* table = nullptr, std::ostream* trace_out = nullptr);

struct SweepRow {
    std::string mode;
    double x = 0; // hit rate or request rate
    double ttft_mean = 0;
    double itl_mean = 0;
    double bubble_s = 0;
    double compute_s = 0;
    double cost_per_mtok = 0;
};

std::string sweep_csv_header();
std::string sweep_row_csv(const SweepRow& r);

// One run per (mode, hit-rate) pair over a shared trace.
std::vector<SweepRow> run_hit_rate_sweep(const SimConfig& base, const std::vector<Request>& trace,
                                         const std::vector<BackendMode>& modes,
                                         const std::vector<double>& hit_rates);

} // namespace tutti
