#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "core/error.hpp"

namespace tutti {

struct Request {
    double arrival_s = 0;
    uint64_t prompt_tokens = 0;
    uint32_t prefix_group = 0;
    uint64_t reused_prefix_tokens = 0;
    uint64_t output_tokens = 0;

    friend bool operator==(const Request&, const Request&) = default;
};

struct TraceSpec {
    double rate_rps = 1.0;
    double duration_s = 60.0;
    std::string length_dist = "uniform"; // uniform | lognormal | leval | loogle
    double len_a = 4096;                 // uniform: min; lognormal: mu (ln tokens)
    double len_b = 65536;                // uniform: max; lognormal: sigma
    std::string reuse_dist = "fixed";    // fixed | uniform
    double reuse_frac = 0.75;
    int num_groups = 4;
    uint64_t output_tokens = 128;
    uint64_t seed = 1;

    void validate() const {
        if (rate_rps <= 0) fail(Errc::invalid_config, "trace spec: rate must be > 0");
        if (duration_s <= 0) fail(Errc::invalid_config, "trace spec: duration must be > 0");
        if (num_groups < 1) fail(Errc::invalid_config, "trace spec: num_groups must be >= 1");
        if (reuse_frac < 0 || reuse_frac > 1) fail(Errc::invalid_config, "trace spec: reuse_frac in [0,1]");
    }
};

// Poisson arrivals, round-robin prefix groups, seeded and reproducible.
std::vector<Request> gen_trace(const TraceSpec& spec);

// JSONL, one Request per line.
void save_trace(const std::vector<Request>& trace, const std::string& path);
std::vector<Request> load_trace(const std::string& path);
std::vector<Request> parse_trace(const std::string& jsonl_text);
std::string trace_to_jsonl(const std::vector<Request>& trace);

} // namespace tutti
