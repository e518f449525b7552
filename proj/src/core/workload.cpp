#include "core/workload.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

namespace tutti {

namespace {

uint64_t sample_length(const TraceSpec& spec, std::mt19937_64& rng) {
    if (spec.length_dist == "uniform") {
        std::uniform_int_distribution<uint64_t> d(uint64_t(spec.len_a), uint64_t(spec.len_b));
        return d(rng);
    }
    double mu, sigma, lo, hi;
    if (spec.length_dist == "lognormal") {
        mu = spec.len_a;
        sigma = spec.len_b;
        lo = 1;
        hi = 1e9;
    } else if (spec.length_dist == "leval") {
        // Long-document QA style: 3k..200k tokens, bulk in the tens of k.
        mu = std::log(24000.0);
        sigma = 1.0;
        lo = 3000;
        hi = 200000;
    } else if (spec.length_dist == "loogle") {
        // Very-long-context style: centered above 100k tokens.
        mu = std::log(120000.0);
        sigma = 0.3;
        lo = 60000;
        hi = 250000;
    } else {
        fail(Errc::invalid_config, "unknown length_dist: " + spec.length_dist);
    }
    std::lognormal_distribution<double> d(mu, sigma);
    return uint64_t(std::clamp(d(rng), lo, hi));
}

} // namespace

std::vector<Request> gen_trace(const TraceSpec& spec) {
    spec.validate();
    std::mt19937_64 rng(spec.seed);
    std::exponential_distribution<double> inter(spec.rate_rps);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    std::vector<Request> out;
    double t = 0;
    uint32_t group = 0;
    while (true) {
        t += inter(rng);
        if (t > spec.duration_s) break;
        Request r;
        r.arrival_s = t;
        r.prompt_tokens = std::max<uint64_t>(1, sample_length(spec, rng));
        r.prefix_group = group;
        double frac = spec.reuse_dist == "uniform" ? unit(rng) : spec.reuse_frac;
        r.reused_prefix_tokens = uint64_t(frac * double(r.prompt_tokens));
        r.output_tokens = spec.output_tokens;
        out.push_back(r);
        group = uint32_t((group + 1) % uint32_t(spec.num_groups));
    }
    return out;
}

std::string trace_to_jsonl(const std::vector<Request>& trace) {
    std::ostringstream os;
    for (const Request& r : trace) {
        nlohmann::ordered_json j;
        j["arrival_s"] = r.arrival_s;
        j["prompt_tokens"] = r.prompt_tokens;
        j["prefix_group"] = r.prefix_group;
        j["reused_prefix_tokens"] = r.reused_prefix_tokens;
        j["output_tokens"] = r.output_tokens;
        os << j.dump() << '\n';
    }
    return os.str();
}

std::vector<Request> parse_trace(const std::string& jsonl_text) {
    std::vector<Request> out;
    std::istringstream is(jsonl_text);
    std::string line;
    size_t line_no = 0;
    double prev_arrival = -1;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
            Request r;
            r.arrival_s = j.at("arrival_s");
            r.prompt_tokens = j.at("prompt_tokens");
            r.prefix_group = j.at("prefix_group");
            r.reused_prefix_tokens = j.at("reused_prefix_tokens");
            r.output_tokens = j.at("output_tokens");
            if (r.reused_prefix_tokens > r.prompt_tokens)
                throw std::runtime_error("reused_prefix_tokens > prompt_tokens");
            if (r.arrival_s < prev_arrival) throw std::runtime_error("arrivals not non-decreasing");
            prev_arrival = r.arrival_s;
            out.push_back(r);
        } catch (const std::exception& e) {
            fail(Errc::parse_error,
                 "trace parse error at line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return out;
}

void save_trace(const std::vector<Request>& trace, const std::string& path) {
    std::ofstream f(path);
    if (!f) fail(Errc::runtime_error, "cannot open trace file for writing: " + path);
    f << trace_to_jsonl(trace);
}

std::vector<Request> load_trace(const std::string& path) {
    std::ifstream f(path);
    if (!f) fail(Errc::parse_error, "cannot open trace file: " + path);
    std::ostringstream buf;
    buf << f.rdbuf();
    return parse_trace(buf.str());
}

} // namespace tutti
