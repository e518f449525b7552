#include "tuttisim.h"

#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "core/bench_ring.hpp"
#include "core/config.hpp"
#include "core/device_model.hpp"
#include "core/mapping_table.hpp"
#include "core/metrics.hpp"
#include "core/object_store.hpp"
#include "core/sim_engine.hpp"
#include "core/workload.hpp"

using namespace tutti;

namespace {

thread_local std::string g_last_error;

tutti_status status_for(const Error& e) {
    switch (e.code()) {
    case Errc::parse_error:
    case Errc::table_missing:
        return TUTTI_EPARSE;
    case Errc::invalid_config:
    case Errc::invalid_transfer:
    case Errc::out_of_range:
        return TUTTI_EINVAL;
    default:
        return TUTTI_ERUNTIME;
    }
}

tutti_status set_error(const std::exception& e, tutti_status st) {
    g_last_error = e.what();
    return st;
}

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (!out) return nullptr;
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

template <typename Fn> tutti_status guarded(Fn&& fn) {
    try {
        fn();
        return TUTTI_OK;
    } catch (const Error& e) {
        return set_error(e, status_for(e));
    } catch (const std::exception& e) {
        return set_error(e, TUTTI_ERUNTIME);
    }
}

template <typename Fn> char* guarded_string(Fn&& fn) {
    try {
        return dup_string(fn());
    } catch (const Error& e) {
        set_error(e, status_for(e));
        return nullptr;
    } catch (const std::exception& e) {
        set_error(e, TUTTI_ERUNTIME);
        return nullptr;
    }
}

} // namespace

struct tutti_config {
    SimConfig cfg;
};

struct tutti_trace {
    std::vector<Request> reqs;
};

extern "C" {

const char* tutti_last_error(void) { return g_last_error.c_str(); }

void tutti_string_free(char* s) { std::free(s); }

tutti_status tutti_prp_footprint(uint64_t cache_bytes, uint64_t* out_bytes) {
    if (!out_bytes) return TUTTI_EINVAL;
    return guarded([&] { *out_bytes = prp_footprint_bytes(cache_bytes); });
}

tutti_status tutti_sgl_footprint(uint64_t cache_bytes, uint64_t* out_bytes) {
    if (!out_bytes) return TUTTI_EINVAL;
    return guarded([&] { *out_bytes = sgl_footprint_bytes(cache_bytes); });
}

tutti_status tutti_place_object(int num_devices, uint64_t file_ordinal, int layer,
                                int is_value, int* out_device) {
    if (!out_device) return TUTTI_EINVAL;
    return guarded([&] {
        StoreConfig sc;
        sc.num_devices = num_devices;
        sc.validate();
        *out_device = place_object(sc, file_ordinal, layer, is_value ? ObjKind::Value : ObjKind::Key);
    });
}

tutti_status tutti_provision_queues(int n_gpus, int per_gpu, int max_queues, int* out_pairs) {
    if (!out_pairs) return TUTTI_EINVAL;
    return guarded([&] {
        auto ranges = provision_queues(n_gpus, per_gpu, max_queues);
        for (size_t i = 0; i < ranges.size(); ++i) {
            out_pairs[2 * i] = ranges[i].first;
            out_pairs[2 * i + 1] = ranges[i].count;
        }
    });
}

tutti_status tutti_cost_per_mtok(double p_gpu, int n_gpu, double p_mem, double s_mem,
                                 double p_ssd, double s_ssd, double throughput,
                                 double* out_cost) {
    if (!out_cost) return TUTTI_EINVAL;
    return guarded([&] {
        CostParams p;
        p.p_gpu = p_gpu;
        p.n_gpu = n_gpu;
        p.p_mem = p_mem;
        p.s_mem = s_mem;
        p.p_ssd = p_ssd;
        p.s_ssd = s_ssd;
        p.throughput = throughput;
        *out_cost = cost_per_million(p);
    });
}

tutti_config* tutti_config_default(void) {
    return new (std::nothrow) tutti_config{};
}

tutti_config* tutti_config_load(const char* path) {
    if (!path) return nullptr;
    tutti_config* out = nullptr;
    tutti_status st = guarded([&] { out = new tutti_config{load_config(path)}; });
    if (st != TUTTI_OK) {
        delete out;
        return nullptr;
    }
    return out;
}

tutti_status tutti_config_override(tutti_config* cfg, const char* key_eq_value) {
    if (!cfg || !key_eq_value) return TUTTI_EINVAL;
    return guarded([&] { apply_override(cfg->cfg, key_eq_value); });
}

char* tutti_config_dump_ini(void) {
    return guarded_string([] { return default_config_ini(); });
}

void tutti_config_free(tutti_config* cfg) { delete cfg; }

tutti_trace* tutti_trace_generate(const tutti_config* cfg) {
    if (!cfg) return nullptr;
    tutti_trace* out = nullptr;
    tutti_status st = guarded([&] { out = new tutti_trace{gen_trace(cfg->cfg.trace)}; });
    return st == TUTTI_OK ? out : nullptr;
}

tutti_trace* tutti_trace_load(const char* path) {
    if (!path) return nullptr;
    tutti_trace* out = nullptr;
    tutti_status st = guarded([&] { out = new tutti_trace{load_trace(path)}; });
    return st == TUTTI_OK ? out : nullptr;
}

tutti_status tutti_trace_save(const tutti_trace* t, const char* path) {
    if (!t || !path) return TUTTI_EINVAL;
    return guarded([&] { save_trace(t->reqs, path); });
}

size_t tutti_trace_size(const tutti_trace* t) { return t ? t->reqs.size() : 0; }

void tutti_trace_free(tutti_trace* t) { delete t; }

char* tutti_simulate(const tutti_config* cfg, const tutti_trace* trace,
                     const char* event_log_path) {
    if (!cfg || !trace) return nullptr;
    return guarded_string([&] {
        std::ofstream log;
        std::ostream* logp = nullptr;
        if (event_log_path) {
            log.open(event_log_path);
            if (!log) fail(Errc::runtime_error, std::string("cannot open ") + event_log_path);
            logp = &log;
        }
        SimReport rep = run_simulation(cfg->cfg, trace->reqs, nullptr, logp);
        return rep.to_json();
    });
}

char* tutti_sweep(const tutti_config* cfg, const tutti_trace* trace, const char* modes_csv,
                  const double* hit_rates, size_t n_rates) {
    if (!cfg || !trace || !modes_csv || (!hit_rates && n_rates)) return nullptr;
    return guarded_string([&] {
        std::vector<BackendMode> modes;
        std::stringstream ss(modes_csv);
        std::string tok;
        while (std::getline(ss, tok, ','))
            if (!tok.empty()) modes.push_back(mode_from_name(tok));
        if (modes.empty()) fail(Errc::invalid_config, "no backend modes given");
        std::vector<double> rates(hit_rates, hit_rates + n_rates);
        auto rows = run_hit_rate_sweep(cfg->cfg, trace->reqs, modes, rates);
        std::ostringstream os;
        os << sweep_csv_header() << '\n';
        for (const auto& r : rows) os << sweep_row_csv(r) << '\n';
        return os.str();
    });
}

char* tutti_profile(const tutti_config* cfg) {
    if (!cfg) return nullptr;
    return guarded_string([&] { return build_table_for(cfg->cfg).to_json(); });
}

char* tutti_bench_ring(int depth, uint64_t ops, int threads, uint64_t seed) {
    return guarded_string([&] {
        BenchResult r = bench_ring(uint32_t(depth), ops, threads, seed);
        nlohmann::ordered_json j;
        j["ops"] = r.ops;
        j["seconds"] = r.seconds;
        j["ops_per_sec"] = r.ops_per_sec;
        j["verified"] = r.verified;
        j["lost"] = r.lost;
        j["duplicated"] = r.duplicated;
        j["dependency_violations"] = r.dependency_violations;
        j["conservation_violations"] = r.conservation_violations;
        return j.dump(2);
    });
}

} // extern "C"
