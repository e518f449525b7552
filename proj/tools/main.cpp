#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tuttisim.h"

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;
constexpr int kExitConfig = 3;

struct ConfigDeleter {
    void operator()(tutti_config* c) const { tutti_config_free(c); }
};
struct TraceDeleter {
    void operator()(tutti_trace* t) const { tutti_trace_free(t); }
};
using ConfigPtr = std::unique_ptr<tutti_config, ConfigDeleter>;
using TracePtr = std::unique_ptr<tutti_trace, TraceDeleter>;

std::string take_string(char* s) {
    if (!s) return {};
    std::string out(s);
    tutti_string_free(s);
    return out;
}

[[noreturn]] void die(int code, const std::string& msg) {
    std::cerr << "tutti: " << msg << '\n';
    std::exit(code);
}

ConfigPtr make_config(const std::string& path, const std::vector<std::string>& overrides,
                      const std::string& mode) {
    ConfigPtr cfg(path.empty() ? tutti_config_default() : tutti_config_load(path.c_str()));
    if (!cfg) die(kExitConfig, std::string("cannot load config: ") + tutti_last_error());
    if (!mode.empty()) {
        if (tutti_config_override(cfg.get(), ("mode.backend=" + mode).c_str()) != TUTTI_OK)
            die(kExitConfig, tutti_last_error());
    }
    for (const std::string& o : overrides)
        if (tutti_config_override(cfg.get(), o.c_str()) != TUTTI_OK)
            die(kExitConfig, tutti_last_error());
    return cfg;
}

TracePtr make_trace(const tutti_config* cfg, const std::string& trace_path) {
    TracePtr t(trace_path.empty() ? tutti_trace_generate(cfg)
                                  : tutti_trace_load(trace_path.c_str()));
    if (!t) die(kExitConfig, std::string("cannot build trace: ") + tutti_last_error());
    return t;
}

void emit(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << text;
        if (!text.empty() && text.back() != '\n') std::cout << '\n';
        return;
    }
    std::ofstream f(out_path);
    if (!f) die(kExitRuntime, "cannot open output file " + out_path);
    f << text;
}

// "0.5:1.0:0.0625" (start:stop:step, inclusive), or "0.25,0.5,0.75".
std::vector<double> parse_rates(const std::string& spec) {
    std::vector<double> out;
    if (spec.find(':') != std::string::npos) {
        double a, b, step;
        char c1, c2;
        std::istringstream is(spec);
        if (!(is >> a >> c1 >> b >> c2 >> step) || c1 != ':' || c2 != ':' || step <= 0)
            die(kExitUsage, "bad hit-rate range: " + spec);
        for (double v = a; v <= b + step * 1e-9; v += step) out.push_back(v);
        return out;
    }
    std::stringstream ss(spec);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok.empty()) continue;
        try {
            out.push_back(std::stod(tok));
        } catch (...) {
            die(kExitUsage, "bad hit rate: " + tok);
        }
    }
    if (out.empty()) die(kExitUsage, "no hit rates in: " + spec);
    return out;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"KV-cache tiering simulator"};
    app.require_subcommand(1);

    std::string config_path, mode, trace_path, out_path, log_path;
    std::vector<std::string> overrides;

    auto add_common = [&](CLI::App* cmd, bool with_trace) {
        cmd->add_option("--config", config_path, "INI config file");
        cmd->add_option("--override", overrides, "section.key=value override (repeatable)");
        cmd->add_option("--out", out_path, "write result to file instead of stdout");
        if (with_trace) {
            cmd->add_option("--mode", mode, "backend: hbm, dram, ssd, gds, tutti");
            cmd->add_option("--trace", trace_path, "JSONL request trace (generated if omitted)");
        }
    };

    auto* sim = app.add_subcommand("simulate", "run one simulation, print JSON report");
    add_common(sim, true);
    sim->add_option("--log", log_path, "write per-event JSONL log here");

    auto* sweep = app.add_subcommand("sweep", "hit-rate sweep across backends, print CSV");
    add_common(sweep, false);
    sweep->add_option("--trace", trace_path, "JSONL request trace (generated if omitted)");
    std::string modes_csv = "tutti,ssd";
    std::string rates_spec = "0.5:1.0:0.0625";
    sweep->add_option("--mode,--modes", modes_csv, "comma-separated backend list");
    sweep->add_option("--hit-rates", rates_spec, "start:stop:step or comma list");

    auto* prof = app.add_subcommand("profile", "build slack table, print JSON");
    add_common(prof, false);

    auto* foot = app.add_subcommand("footprint", "mapping-table footprint arithmetic");
    double cache_gib = 60.0;
    foot->add_option("--cache-gib", cache_gib, "cache size in GiB")->check(CLI::PositiveNumber);
    foot->add_option("--out", out_path, "write result to file instead of stdout");

    auto* bench = app.add_subcommand("bench-ring", "threaded ring micro-benchmark");
    int depth = 256, threads = 2;
    uint64_t ops = 1000000, bench_seed = 42;
    bench->add_option("--depth", depth)->check(CLI::PositiveNumber);
    bench->add_option("--ops", ops)->check(CLI::PositiveNumber);
    bench->add_option("--threads", threads)->check(CLI::Range(1, 2));
    bench->add_option("--seed", bench_seed);
    bench->add_option("--out", out_path, "write result to file instead of stdout");

    auto* gen = app.add_subcommand("gen-trace", "generate a request trace as JSONL");
    add_common(gen, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    if (log_path.empty()) {
        if (const char* env = std::getenv("TUTTI_SIM_LOG")) log_path = env;
    }

    if (foot->parsed()) {
        uint64_t cache = uint64_t(cache_gib * 1024.0 * 1024.0 * 1024.0);
        uint64_t prp = 0, sgl = 0;
        if (tutti_prp_footprint(cache, &prp) != TUTTI_OK ||
            tutti_sgl_footprint(cache, &sgl) != TUTTI_OK)
            die(kExitRuntime, tutti_last_error());
        std::ostringstream os;
        os << "{\n  \"cache_bytes\": " << cache << ",\n  \"prp_bytes\": " << prp
           << ",\n  \"sgl_bytes\": " << sgl << ",\n  \"ratio\": " << double(prp) / double(sgl)
           << "\n}";
        emit(os.str(), out_path);
        return 0;
    }

    if (bench->parsed()) {
        std::string j = take_string(tutti_bench_ring(depth, ops, threads, bench_seed));
        if (j.empty()) die(kExitRuntime, tutti_last_error());
        emit(j, out_path);
        return 0;
    }

    ConfigPtr cfg = make_config(config_path, overrides, mode);

    if (prof->parsed()) {
        std::string j = take_string(tutti_profile(cfg.get()));
        if (j.empty()) die(kExitRuntime, tutti_last_error());
        emit(j, out_path);
        return 0;
    }

    if (gen->parsed()) {
        TracePtr t(tutti_trace_generate(cfg.get()));
        if (!t) die(kExitConfig, tutti_last_error());
        if (out_path.empty()) out_path = "trace.jsonl";
        if (tutti_trace_save(t.get(), out_path.c_str()) != TUTTI_OK)
            die(kExitRuntime, tutti_last_error());
        std::cerr << "wrote " << tutti_trace_size(t.get()) << " requests to " << out_path << '\n';
        return 0;
    }

    TracePtr trace = make_trace(cfg.get(), trace_path);

    if (sim->parsed()) {
        std::string j = take_string(
            tutti_simulate(cfg.get(), trace.get(), log_path.empty() ? nullptr : log_path.c_str()));
        if (j.empty()) die(kExitRuntime, tutti_last_error());
        emit(j, out_path);
        return 0;
    }

    if (sweep->parsed()) {
        std::vector<double> rates = parse_rates(rates_spec);
        std::string csv = take_string(
            tutti_sweep(cfg.get(), trace.get(), modes_csv.c_str(), rates.data(), rates.size()));
        if (csv.empty()) die(kExitRuntime, tutti_last_error());
        emit(csv, out_path);
        return 0;
    }

    return kExitUsage;
}
