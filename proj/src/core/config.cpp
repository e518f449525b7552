#include "core/config.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <json.hpp>

namespace tutti {

std::string mode_name(BackendMode m) {
    switch (m) {
    case BackendMode::HbmOnly: return "hbm";
    case BackendMode::DramLw: return "dram";
    case BackendMode::SsdBaseline: return "ssd";
    case BackendMode::GdsLike: return "gds";
    case BackendMode::Tutti: return "tutti";
    }
    return "?";
}

BackendMode mode_from_name(const std::string& name) {
    if (name == "hbm") return BackendMode::HbmOnly;
    if (name == "dram") return BackendMode::DramLw;
    if (name == "ssd") return BackendMode::SsdBaseline;
    if (name == "gds") return BackendMode::GdsLike;
    if (name == "tutti") return BackendMode::Tutti;
    fail(Errc::invalid_config, "unknown mode: " + name);
}

StoreConfig SimConfig::store_config() const {
    StoreConfig s;
    s.num_devices = num_devices;
    s.num_layers = model.num_layers;
    s.block_tokens = block_tokens;
    s.bytes_per_token_per_layer = model.bytes_per_token_per_layer;
    uint64_t blocks = (ssd_tokens + uint64_t(block_tokens) - 1) / uint64_t(block_tokens);
    s.files_per_device = int((blocks + uint64_t(num_devices) - 1) / uint64_t(num_devices));
    return s;
}

void SimConfig::validate() const {
    model.validate();
    device.validate();
    store_config().validate();
    if (block_tokens < 1 || grid_step < 1 || ring_depth < 1 || ioctx_per_iocb < 1 ||
        chunk_tokens < 1 || num_devices < 1)
        fail(Errc::invalid_config, "config: counts must be >= 1");
    if (dram_bw <= 0) fail(Errc::invalid_config, "config: dram_bw must be > 0");
    if (forced_hit_rate > 1) fail(Errc::invalid_config, "config: forced_hit_rate must be <= 1");
}

namespace {

using Setter = std::function<void(SimConfig&, const std::string&)>;

double to_f(const std::string& v) {
    size_t pos = 0;
    double d = std::stod(v, &pos);
    if (pos != v.size()) fail(Errc::parse_error, "bad numeric value: " + v);
    return d;
}
int64_t to_i(const std::string& v) {
    size_t pos = 0;
    long long i = std::stoll(v, &pos);
    if (pos != v.size()) fail(Errc::parse_error, "bad integer value: " + v);
    return i;
}

void set_phases(SimConfig& c, const std::string& v) {
    auto j = nlohmann::json::parse(v);
    std::vector<Phase> phases;
    for (const auto& p : j)
        phases.push_back(Phase{p.at("name").get<std::string>(), p.at("sm_fraction").get<double>(),
                               p.value("a", 0.0), p.value("b", 0.0), p.value("c", 0.0)});
    c.model.phases = std::move(phases);
}

const std::map<std::string, Setter>& setters() {
    static const std::map<std::string, Setter> table = {
        {"model.num_layers", [](SimConfig& c, const std::string& v) { c.model.num_layers = int(to_i(v)); }},
        {"model.total_sms", [](SimConfig& c, const std::string& v) { c.model.total_sms = int(to_i(v)); }},
        {"model.io_reserved_sms", [](SimConfig& c, const std::string& v) { c.model.io_reserved_sms = int(to_i(v)); }},
        {"model.io_sm_threshold", [](SimConfig& c, const std::string& v) { c.model.io_sm_threshold = to_f(v); }},
        {"model.decode_d0", [](SimConfig& c, const std::string& v) { c.model.decode_d0 = to_f(v); }},
        {"model.decode_d1", [](SimConfig& c, const std::string& v) { c.model.decode_d1 = to_f(v); }},
        {"model.decode_sm_fraction", [](SimConfig& c, const std::string& v) { c.model.decode_sm_fraction = to_f(v); }},
        {"model.slack_frac", [](SimConfig& c, const std::string& v) { c.model.slack_frac = to_f(v); }},
        {"model.bytes_per_token_per_layer",
         [](SimConfig& c, const std::string& v) { c.model.bytes_per_token_per_layer = uint64_t(to_i(v)); }},
        {"model.block_tokens", [](SimConfig& c, const std::string& v) { c.block_tokens = int(to_i(v)); }},
        {"model.grid_step", [](SimConfig& c, const std::string& v) { c.grid_step = int(to_i(v)); }},
        {"model.max_input_tokens", [](SimConfig& c, const std::string& v) { c.max_input_tokens = int(to_i(v)); }},
        {"model.max_prefix_tokens", [](SimConfig& c, const std::string& v) { c.max_prefix_tokens = int(to_i(v)); }},
        {"model.phases", set_phases},

        {"devices.count", [](SimConfig& c, const std::string& v) { c.num_devices = int(to_i(v)); }},
        {"devices.read_bw", [](SimConfig& c, const std::string& v) { c.device.read_bw = to_f(v); }},
        {"devices.write_bw", [](SimConfig& c, const std::string& v) { c.device.write_bw = to_f(v); }},
        {"devices.base_latency", [](SimConfig& c, const std::string& v) { c.device.base_latency = to_f(v); }},
        {"devices.contention_factor",
         [](SimConfig& c, const std::string& v) { c.device.contention_factor = to_f(v); }},
        {"devices.num_queues", [](SimConfig& c, const std::string& v) { c.device.num_queues = int(to_i(v)); }},
        {"devices.max_queues", [](SimConfig& c, const std::string& v) { c.device.max_queues = int(to_i(v)); }},
        {"devices.dram_bw", [](SimConfig& c, const std::string& v) { c.dram_bw = to_f(v); }},
        {"devices.dram_base_latency", [](SimConfig& c, const std::string& v) { c.dram_base_latency = to_f(v); }},
        {"devices.n_gpus", [](SimConfig& c, const std::string& v) { c.n_gpus = int(to_i(v)); }},
        {"devices.queues_per_gpu", [](SimConfig& c, const std::string& v) { c.queues_per_gpu = int(to_i(v)); }},

        {"tiers.hbm_tokens", [](SimConfig& c, const std::string& v) { c.hbm_tokens = uint64_t(to_i(v)); }},
        {"tiers.dram_tokens", [](SimConfig& c, const std::string& v) { c.dram_tokens = uint64_t(to_i(v)); }},
        {"tiers.ssd_tokens", [](SimConfig& c, const std::string& v) { c.ssd_tokens = uint64_t(to_i(v)); }},
        {"tiers.forced_hit_rate", [](SimConfig& c, const std::string& v) { c.forced_hit_rate = to_f(v); }},
        {"tiers.remote_tier_latency_s",
         [](SimConfig& c, const std::string& v) { c.remote_tier_latency_s = to_f(v); }},

        {"scheduler.ring_depth", [](SimConfig& c, const std::string& v) { c.ring_depth = int(to_i(v)); }},
        {"scheduler.ioctx_per_iocb", [](SimConfig& c, const std::string& v) { c.ioctx_per_iocb = int(to_i(v)); }},
        {"scheduler.io_sm_per_iocb", [](SimConfig& c, const std::string& v) { c.io_sm_per_iocb = int(to_i(v)); }},
        {"scheduler.io_max_sms", [](SimConfig& c, const std::string& v) { c.io_max_sms = int(to_i(v)); }},
        {"scheduler.profile_ioctx_per_iocb",
         [](SimConfig& c, const std::string& v) { c.profile_ioctx_per_iocb = int(to_i(v)); }},
        {"scheduler.deferred_write_cap",
         [](SimConfig& c, const std::string& v) { c.deferred_write_cap = uint64_t(to_i(v)); }},

        {"mode.backend", [](SimConfig& c, const std::string& v) { c.mode = mode_from_name(v); }},
        {"mode.cpu_submit_latency", [](SimConfig& c, const std::string& v) { c.cpu_submit_latency = to_f(v); }},
        {"mode.layer_launch_cost", [](SimConfig& c, const std::string& v) { c.layer_launch_cost = to_f(v); }},
        {"mode.chunk_tokens", [](SimConfig& c, const std::string& v) { c.chunk_tokens = int(to_i(v)); }},
        {"mode.seed", [](SimConfig& c, const std::string& v) { c.seed = uint64_t(to_i(v)); }},

        {"workload.rate_rps", [](SimConfig& c, const std::string& v) { c.trace.rate_rps = to_f(v); }},
        {"workload.duration_s", [](SimConfig& c, const std::string& v) { c.trace.duration_s = to_f(v); }},
        {"workload.length_dist", [](SimConfig& c, const std::string& v) { c.trace.length_dist = v; }},
        {"workload.len_a", [](SimConfig& c, const std::string& v) { c.trace.len_a = to_f(v); }},
        {"workload.len_b", [](SimConfig& c, const std::string& v) { c.trace.len_b = to_f(v); }},
        {"workload.reuse_dist", [](SimConfig& c, const std::string& v) { c.trace.reuse_dist = v; }},
        {"workload.reuse_frac", [](SimConfig& c, const std::string& v) { c.trace.reuse_frac = to_f(v); }},
        {"workload.num_groups", [](SimConfig& c, const std::string& v) { c.trace.num_groups = int(to_i(v)); }},
        {"workload.output_tokens", [](SimConfig& c, const std::string& v) { c.trace.output_tokens = uint64_t(to_i(v)); }},
        {"workload.seed", [](SimConfig& c, const std::string& v) { c.trace.seed = uint64_t(to_i(v)); }},

        {"cost.p_gpu", [](SimConfig& c, const std::string& v) { c.cost.p_gpu = to_f(v); }},
        {"cost.n_gpu", [](SimConfig& c, const std::string& v) { c.cost.n_gpu = int(to_i(v)); }},
        {"cost.p_mem", [](SimConfig& c, const std::string& v) { c.cost.p_mem = to_f(v); }},
        {"cost.s_mem", [](SimConfig& c, const std::string& v) { c.cost.s_mem = to_f(v); }},
        {"cost.p_ssd", [](SimConfig& c, const std::string& v) { c.cost.p_ssd = to_f(v); }},
        {"cost.s_ssd", [](SimConfig& c, const std::string& v) { c.cost.s_ssd = to_f(v); }},
    };
    return table;
}

std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

} // namespace

void apply_override(SimConfig& cfg, const std::string& key_eq_value) {
    size_t eq = key_eq_value.find('=');
    if (eq == std::string::npos)
        fail(Errc::invalid_config, "override must be section.key=value: " + key_eq_value);
    std::string key = trim(key_eq_value.substr(0, eq));
    std::string value = trim(key_eq_value.substr(eq + 1));
    auto it = setters().find(key);
    if (it == setters().end()) fail(Errc::invalid_config, "unknown config key: " + key);
    try {
        it->second(cfg, value);
    } catch (const Error&) {
        throw;
    } catch (const std::exception& e) {
        fail(Errc::invalid_config, "bad value for " + key + ": " + e.what());
    }
}

SimConfig parse_config(const std::string& ini_text) {
    SimConfig cfg;
    std::istringstream is(ini_text);
    std::string line, section;
    size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#' || t[0] == ';') continue;
        if (t.front() == '[' && t.back() == ']') {
            section = trim(t.substr(1, t.size() - 2));
            static const std::set<std::string> known = {"model", "devices", "tiers",
                                                        "scheduler", "mode", "workload", "cost"};
            if (!known.count(section))
                fail(Errc::invalid_config,
                     "unknown config section [" + section + "] at line " + std::to_string(line_no));
            continue;
        }
        size_t eq = t.find('=');
        if (eq == std::string::npos || section.empty())
            fail(Errc::parse_error, "malformed config line " + std::to_string(line_no));
        apply_override(cfg, section + "." + trim(t.substr(0, eq)) + "=" + trim(t.substr(eq + 1)));
    }
    return cfg;
}

SimConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) fail(Errc::invalid_config, "cannot open config file: " + path);
    std::ostringstream buf;
    buf << f.rdbuf();
    return parse_config(buf.str());
}

std::string default_config_ini() {
    return R"([model]
num_layers = 64
total_sms = 132
io_reserved_sms = 2
bytes_per_token_per_layer = 1280
block_tokens = 64
grid_step = 32
decode_d0 = 8e-3
decode_d1 = 1e-8

[devices]
count = 2
read_bw = 29e9
write_bw = 12e9
contention_factor = 0.4
base_latency = 50e-6
dram_bw = 50e9
num_queues = 32
max_queues = 256

[tiers]
hbm_tokens = 65536
dram_tokens = 262144
ssd_tokens = 8388608

[scheduler]
ring_depth = 256
ioctx_per_iocb = 2048

[mode]
backend = tutti
cpu_submit_latency = 10e-6
layer_launch_cost = 5e-6
chunk_tokens = 256

[workload]
rate_rps = 0.5
duration_s = 20
length_dist = uniform
len_a = 32768
len_b = 65536
reuse_frac = 0.75
num_groups = 4
output_tokens = 64
seed = 1
)";
}

} // namespace tutti
