#include "core/sim_engine.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstring>
#include <deque>
#include <list>
#include <queue>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "core/device_model.hpp"
#include "core/gio_uring.hpp"
#include "core/mapping_table.hpp"
#include "core/metrics.hpp"
#include "core/object_store.hpp"
#include "core/scheduler.hpp"

namespace tutti {

namespace {

enum class EvKind : int {
    DeviceService = 0,
    IoSubmit,
    IoComplete,
    LayerEnd,
    LayerStart,
    DecodeStep,
    Arrival,
    RequestDone,
};

// Tie-break priority at equal timestamps (fixed for reproducibility).
int ev_prio(EvKind k) { return int(k); }

const char* ev_name(EvKind k) {
    switch (k) {
    case EvKind::DeviceService: return "device_service";
    case EvKind::IoSubmit: return "io_submit";
    case EvKind::IoComplete: return "io_complete";
    case EvKind::LayerEnd: return "layer_end";
    case EvKind::LayerStart: return "layer_start";
    case EvKind::DecodeStep: return "decode_step";
    case EvKind::Arrival: return "arrival";
    case EvKind::RequestDone: return "request_done";
    }
    return "?";
}

struct Ev {
    double t;
    int prio;
    uint64_t seq;
    EvKind kind;
    uint64_t a;
    uint64_t b;
};

struct EvLater {
    bool operator()(const Ev& x, const Ev& y) const {
        if (x.t != y.t) return x.t > y.t;
        if (x.prio != y.prio) return x.prio > y.prio;
        return x.seq > y.seq;
    }
};

uint64_t fnv1a(uint64_t h, uint64_t v) {
    for (int i = 0; i < 8; ++i) {
        h ^= (v >> (8 * i)) & 0xff;
        h *= 1099511628211ULL;
    }
    return h;
}

uint64_t double_bits(double d) {
    uint64_t u;
    static_assert(sizeof(u) == sizeof(d));
    std::memcpy(&u, &d, sizeof(u));
    return u;
}

class Engine {
public:
    Engine(const SimConfig& cfg, const SlackTable* table, std::ostream* tlog)
        : cfg_(cfg), mc_(cfg.model), mode_(cfg.mode), tlog_(tlog) {
        cfg_.validate();
        // Device 0..D-1 are SSDs; the last entry models the DRAM pipe.
        for (int d = 0; d < cfg_.num_devices; ++d) devices_.emplace_back(cfg_.device, d);
        DeviceConfig dramc;
        dramc.read_bw = cfg_.dram_bw;
        dramc.write_bw = cfg_.dram_bw;
        dramc.base_latency = cfg_.dram_base_latency;
        dramc.contention_factor = 1.0;
        dram_dev_ = cfg_.num_devices;
        devices_.emplace_back(dramc, dram_dev_);
        dev_stamp_.assign(devices_.size(), 0);

        if (uses_ssd()) {
            pool_.emplace(cfg_.store_config());
            p2p_.emplace(0, uint64_t(1) << 30, 65536);
        }
        if (mode_ == BackendMode::Tutti) {
            ring_.emplace(uint32_t(cfg_.ring_depth), uint32_t(cfg_.ioctx_per_iocb));
            sched_.emplace(cfg_.deferred_write_cap, cfg_.io_max_sms);
            if (table) {
                table_ = table;
            } else {
                owned_table_.emplace(build_table_for(cfg_));
                table_ = &*owned_table_;
            }
        }
    }

    SimReport run(const std::vector<Request>& trace);

private:
    bool uses_ssd() const {
        return mode_ == BackendMode::SsdBaseline || mode_ == BackendMode::GdsLike ||
               mode_ == BackendMode::Tutti;
    }
    bool prefetches() const {
        return mode_ == BackendMode::DramLw || mode_ == BackendMode::GdsLike ||
               mode_ == BackendMode::Tutti;
    }

    struct ReqState {
        Request r;
        RequestRecord rec;
        uint64_t hit_hbm = 0, hit_dram = 0, hit_ssd = 0;
        uint64_t l_new = 0, l_prefix = 0;
        uint64_t new_tokens = 0;
        std::vector<uint64_t> read_res;  // hit file count per ordinal residue
        std::vector<uint64_t> write_res; // new file count per ordinal residue
        int waiting_layer = -1;
        double wait_start = 0;
        std::vector<int> reads_remaining;
        std::vector<double> reads_ready_at;
        std::vector<int> writes_remaining;
        double decode_prev = 0;
        double itl_sum = 0;
    };

    struct Flow {
        int req;
        int layer;
        IoKind kind;
        int device;
        double bytes;
        uint32_t iocb;
        bool via_ring;
    };

    struct Submission {
        int req;
        int layer;
        IoKind kind;
        int device;
        double bytes;
        uint64_t objects;
        int iocbs; // planned slot count, authoritative for ring submissions
        int sm_budget;
        bool via_ring;
        std::optional<EventId> dep;
    };

    // --- plumbing -----------------------------------------------------

    void schedule(double t, EvKind k, uint64_t a = 0, uint64_t b = 0) {
        pq_.push(Ev{t, ev_prio(k), seq_++, k, a, b});
    }

    void log_event(const Ev& e) {
        hash_ = fnv1a(hash_, double_bits(e.t));
        hash_ = fnv1a(hash_, uint64_t(e.prio));
        hash_ = fnv1a(hash_, e.a);
        hash_ = fnv1a(hash_, e.b);
        if (tlog_) {
            nlohmann::ordered_json j;
            j["t"] = e.t;
            j["kind"] = ev_name(e.kind);
            j["a"] = e.a;
            j["b"] = e.b;
            *tlog_ << j.dump() << '\n';
        }
    }

    void log_plan(double t, int req, int layer, const char* action, int device, int iocbs,
                  bool in_window) {
        if (!tlog_) return;
        nlohmann::ordered_json j;
        j["t"] = t;
        j["kind"] = "plan";
        j["req"] = req;
        j["layer"] = layer;
        j["action"] = action;
        j["device"] = device;
        j["iocbs"] = iocbs;
        j["in_window"] = in_window;
        *tlog_ << j.dump() << '\n';
    }

    double cpu_reserve(double from, double cost) {
        double start = std::max(from, cpu_free_);
        cpu_free_ = start + cost;
        return cpu_free_;
    }

    void bump_device(int dev) {
        dev_stamp_[dev]++;
        if (auto t = devices_[dev].next_service_end())
            schedule(std::max(*t, now_), EvKind::DeviceService, uint64_t(dev), dev_stamp_[dev]);
    }

    void device_submit(uint64_t flow_id, const Flow& f, double t) {
        Device& dev = devices_[f.device];
        if (dev.bytes_in_flight(f.kind == IoKind::Read ? IoKind::Write : IoKind::Read) > 0)
            rw_overlap_++;
        dev.submit(flow_id, f.kind, f.bytes, t);
        flows_[flow_id] = f;
        bump_device(f.device);
    }

    // --- admission ----------------------------------------------------

    uint64_t block_floor(uint64_t tokens) const {
        return tokens / uint64_t(cfg_.block_tokens) * uint64_t(cfg_.block_tokens);
    }

    uint32_t touch_file(uint32_t group, uint64_t block_idx) {
        Hash128 h{uint64_t(group), block_idx};
        auto existing = pool_->lookup(h);
        uint32_t id;
        if (existing) {
            id = *existing;
        } else {
            while (true) {
                try {
                    id = pool_->allocate(h);
                    break;
                } catch (const Error& e) {
                    if (e.code() != Errc::pool_exhausted) throw;
                    evict_lru_file();
                }
            }
        }
        file_last_use_[id] = ++use_seq_;
        return id;
    }

    void evict_lru_file() {
        uint32_t victim = 0;
        uint64_t best = UINT64_MAX;
        bool found = false;
        for (const auto& [id, use] : file_last_use_) {
            if (!pool_->is_allocated(id)) continue;
            if (use < best || (use == best && (!found || id < victim))) {
                best = use;
                victim = id;
                found = true;
            }
        }
        if (!found) fail(Errc::pool_exhausted, "pool exhausted with nothing to evict");
        pool_->release(victim);
        file_last_use_.erase(victim);
    }

    void admit(ReqState& s) {
        const Request& r = s.r;
        uint64_t hit = 0;
        int tier = -1; // 0 hbm, 1 dram, 2 ssd
        if (cfg_.forced_hit_rate >= 0) {
            hit = block_floor(uint64_t(cfg_.forced_hit_rate * double(r.prompt_tokens)));
            if (hit >= r.prompt_tokens) hit = block_floor(r.prompt_tokens - 1);
            switch (mode_) {
            case BackendMode::HbmOnly: tier = 0; break;
            case BackendMode::DramLw: tier = 1; break;
            default: tier = 2; break;
            }
        } else {
            auto it = groups_.find(r.prefix_group);
            if (it != groups_.end() && it->second.tier >= 0) {
                hit = std::min(r.reused_prefix_tokens, it->second.cached);
                tier = it->second.tier;
                lru_touch(it->second.tier, r.prefix_group);
            }
        }
        // Tiers a backend cannot serve fall back to recompute.
        bool serves_dram = mode_ != BackendMode::HbmOnly;
        bool serves_ssd = uses_ssd();
        if (tier == 0) s.hit_hbm = hit;
        else if (tier == 1 && serves_dram) s.hit_dram = hit;
        else if (tier == 2 && serves_ssd) s.hit_ssd = hit;

        s.hit_ssd = block_floor(s.hit_ssd);
        s.l_prefix = s.hit_hbm + s.hit_dram + s.hit_ssd;
        if (s.l_prefix >= r.prompt_tokens) s.l_prefix = r.prompt_tokens - 1;
        s.l_new = r.prompt_tokens - s.l_prefix;

        const int d = cfg_.num_devices;
        s.read_res.assign(d, 0);
        s.write_res.assign(d, 0);
        if (uses_ssd()) {
            uint64_t hit_blocks = s.hit_ssd / uint64_t(cfg_.block_tokens);
            uint64_t total_blocks =
                (r.prompt_tokens + uint64_t(cfg_.block_tokens) - 1) / uint64_t(cfg_.block_tokens);
            for (uint64_t b = 0; b < hit_blocks; ++b)
                s.read_res[touch_file(r.prefix_group, b) % d]++;
            for (uint64_t b = hit_blocks; b < total_blocks; ++b)
                s.write_res[touch_file(r.prefix_group, b) % d]++;
            s.new_tokens = (total_blocks - hit_blocks) * uint64_t(cfg_.block_tokens);
        } else {
            s.new_tokens = r.prompt_tokens - s.l_prefix;
        }

        s.rec.hbm_hit_tokens = s.hit_hbm;
        s.rec.dram_hit_tokens = s.hit_dram;
        s.rec.ssd_hit_tokens = s.hit_ssd;
        s.reads_remaining.assign(mc_.num_layers, -1);
        s.reads_ready_at.assign(mc_.num_layers, -1);
        s.writes_remaining.assign(mc_.num_layers, 0);
    }

    // LRU tiers with downward eviction cascade, group granularity.
    void lru_touch(int tier, uint32_t group) {
        auto& l = tier_lru_[tier];
        l.remove(group);
        l.push_front(group);
    }

    uint64_t tier_capacity(int tier) const {
        switch (tier) {
        case 0: return cfg_.hbm_tokens;
        case 1: return cfg_.dram_tokens;
        default: return cfg_.ssd_tokens;
        }
    }

    void install_cache(uint32_t group, uint64_t tokens) {
        if (cfg_.forced_hit_rate >= 0) return;
        Group& g = groups_[group];
        if (g.tier >= 0) {
            tier_lru_[g.tier].remove(group);
            tier_used_[g.tier] -= g.cached;
        }
        g.cached = std::max(g.cached, tokens);
        g.tier = 0;
        tier_lru_[0].push_front(group);
        tier_used_[0] += g.cached;
        for (int t = 0; t < 3; ++t) {
            while (tier_used_[t] > tier_capacity(t) && !tier_lru_[t].empty()) {
                uint32_t victim = tier_lru_[t].back();
                tier_lru_[t].pop_back();
                Group& vg = groups_[victim];
                tier_used_[t] -= vg.cached;
                if (t + 1 < 3) {
                    vg.tier = t + 1;
                    tier_lru_[t + 1].push_front(victim);
                    tier_used_[t + 1] += vg.cached;
                } else {
                    vg.tier = -1;
                    vg.cached = 0;
                }
            }
        }
    }

    // --- per-layer demand ----------------------------------------------

    uint64_t objects_on_device(const std::vector<uint64_t>& res, int layer, int dev) const {
        const int d = cfg_.num_devices;
        uint64_t n = 0;
        for (int s = 0; s < d; ++s) {
            if ((s + 2 * layer) % d == dev) n += res[s];
            if ((s + 2 * layer + 1) % d == dev) n += res[s];
        }
        return n;
    }

    std::vector<IoBatch> ssd_batches(const ReqState& s, int req, int layer, IoKind kind) const {
        const auto& res = kind == IoKind::Read ? s.read_res : s.write_res;
        std::vector<IoBatch> out;
        for (int dev = 0; dev < cfg_.num_devices; ++dev) {
            uint64_t objs = objects_on_device(res, layer, dev);
            if (!objs) continue;
            IoBatch b;
            b.device = dev;
            b.bytes = double(objs) * double(cfg_.object_bytes());
            b.iocbs = int((objs + uint64_t(cfg_.ioctx_per_iocb) - 1) / uint64_t(cfg_.ioctx_per_iocb));
            b.layer = layer;
            b.request = uint64_t(req);
            b.kind = kind;
            out.push_back(b);
        }
        return out;
    }

    double dram_layer_bytes(const ReqState& s) const {
        return double(s.hit_dram) * 2.0 * double(mc_.bytes_per_token_per_layer);
    }
    double ssd_read_layer_bytes(const ReqState& s) const {
        return double(s.hit_ssd) * 2.0 * double(mc_.bytes_per_token_per_layer);
    }
    double write_layer_bytes(const ReqState& s) const {
        return double(s.new_tokens) * 2.0 * double(mc_.bytes_per_token_per_layer);
    }
    int chunks_for_tokens(uint64_t tokens) const {
        return int((tokens + uint64_t(cfg_.chunk_tokens) - 1) / uint64_t(cfg_.chunk_tokens));
    }

    // --- submissions ----------------------------------------------------

    uint64_t queue_submission(Submission sub, double t) {
        subs_.push_back(sub);
        uint64_t id = subs_.size() - 1;
        schedule(t, EvKind::IoSubmit, id);
        return id;
    }

    void start_submission(uint64_t sub_id, double t) {
        const Submission& sub = subs_[sub_id];
        if (!sub.via_ring) {
            Flow f{sub.req, sub.layer, sub.kind, sub.device, sub.bytes, 0, false};
            device_submit(next_flow_++, f, t);
            return;
        }
        uint64_t n_iocbs = uint64_t(std::max(sub.iocbs, 1));
        if (n_iocbs > ring_->count(SlotState::Free)) {
            ring_backlog_.push_back(sub_id);
            return;
        }
        auto ids = ring_->get_iocb(uint32_t(n_iocbs), sub.dep);
        uint64_t left = sub.objects;
        uint64_t obj_seq = 0;
        uint64_t slots_left = n_iocbs;
        for (uint32_t id : ids) {
            Iocb& slot = ring_->slot(id);
            uint64_t take = (left + slots_left - 1) / slots_left;
            slots_left--;
            slot.ioctxs.reserve(take);
            for (uint64_t k = 0; k < take; ++k, ++obj_seq) {
                Ioctx c;
                uint64_t virt = (obj_seq * cfg_.object_bytes()) % p2p_->region_len();
                c.sgl_ref = uint32_t(p2p_->chunk_index(virt));
                c.file_offset = obj_seq * cfg_.object_bytes();
                c.length = uint32_t(cfg_.object_bytes());
                c.kind = sub.kind;
                c.device_id = sub.device;
                slot.ioctxs.push_back(c);
            }
            left -= take;
        }
        ring_->issue(ids, sub.sm_budget);
        while (auto id = ring_->sq_pop()) {
            const Iocb& slot = ring_->slot(*id);
            double start = t;
            if (slot.dependency) {
                auto it = event_signal_.find(*slot.dependency);
                if (it != event_signal_.end()) start = std::max(start, it->second);
            }
            double bytes = 0;
            for (const Ioctx& c : slot.ioctxs) bytes += c.length;
            Flow f{sub.req, sub.layer, sub.kind, sub.device, bytes, *id, true};
            device_submit(next_flow_++, f, start);
        }
    }

    void retry_backlog(double t) {
        if (ring_backlog_.empty()) return;
        std::deque<uint64_t> again;
        std::swap(again, ring_backlog_);
        for (uint64_t id : again) start_submission(id, t);
    }

    // Counts the flows a batch list will produce.
    int flows_in(const std::vector<PlanItem>& items) const {
        int n = 0;
        for (const PlanItem& it : items) n += it.batch.iocbs;
        return n;
    }

    void submit_layer_reads(int req, int layer, double t) {
        ReqState& s = reqs_[req];
        double dram_bytes = dram_layer_bytes(s);
        int flows = 0;

        if (mode_ == BackendMode::Tutti) {
            auto demand = ssd_batches(s, req, layer, IoKind::Read);
            IoPlan plan;
            if (layer == 0 || !table_) {
                for (const IoBatch& b : demand) {
                    plan.reads.push_back(PlanItem{b, cfg_.io_max_sms, false, -1});
                    plan.immediate_read_batches++;
                }
            } else {
                plan = sched_->plan_prefill_layer(demand, int(s.l_new), int(s.l_prefix), *table_);
            }
            immediate_overflows_ += uint64_t(plan.immediate_read_batches);
            // Ring submissions are GPU-driven: no CPU launch latency.
            double submit_t = t;
            for (const PlanItem& it : plan.reads) {
                log_plan(t, req, layer, "read", it.batch.device, it.batch.iocbs, it.in_window);
                uint64_t objs = uint64_t(std::llround(it.batch.bytes / double(cfg_.object_bytes())));
                queue_submission(Submission{req, layer, IoKind::Read, it.batch.device, it.batch.bytes,
                                            std::max<uint64_t>(objs, 1), it.batch.iocbs,
                                            it.sm_budget, true, std::nullopt},
                                 submit_t);
            }
            for (const PlanItem& it : plan.writes) {
                log_plan(t, req, int(it.batch.layer), "write", it.batch.device, it.batch.iocbs,
                         it.in_window);
                issue_write_batch(it.batch, it.sm_budget, submit_t);
            }
            flows = flows_in(plan.reads);
            if (dram_bytes > 0) {
                queue_submission(Submission{req, layer, IoKind::Read, dram_dev_, dram_bytes, 0, 1, 1,
                                            false, std::nullopt},
                                 submit_t);
                flows++;
            }
        } else if (mode_ == BackendMode::GdsLike || mode_ == BackendMode::SsdBaseline) {
            auto demand = ssd_batches(s, req, layer, IoKind::Read);
            int n = int(demand.size()) + (dram_bytes > 0 ? 1 : 0);
            double cpu = double(chunks_for_tokens(s.hit_ssd)) * cfg_.cpu_submit_latency;
            // Chunk submission is pipelined: each flow reaches its device once
            // the CPU has pushed that flow's share of the chunks.
            double per_flow = n > 0 ? cpu / double(n) : 0;
            for (const IoBatch& b : demand) {
                queue_submission(Submission{req, layer, IoKind::Read, b.device, b.bytes, 0, 1, 1,
                                            false, std::nullopt},
                                 cpu_reserve(t, per_flow));
                flows++;
            }
            if (dram_bytes > 0) {
                queue_submission(Submission{req, layer, IoKind::Read, dram_dev_, dram_bytes, 0, 1, 1,
                                            false, std::nullopt},
                                 cpu_reserve(t, per_flow));
                flows++;
            }
        } else if (mode_ == BackendMode::DramLw) {
            if (dram_bytes > 0) {
                double submit_t = cpu_reserve(t, cfg_.layer_launch_cost);
                queue_submission(Submission{req, layer, IoKind::Read, dram_dev_, dram_bytes, 0, 1, 1,
                                            false, std::nullopt},
                                 submit_t);
                flows++;
            }
        }

        s.reads_remaining[layer] = flows;
        if (flows == 0 && s.reads_ready_at[layer] < 0) mark_reads_ready(req, layer, t);
    }

    void issue_write_batch(const IoBatch& b, int sm_budget, double t) {
        uint64_t key = (uint64_t(b.request) << 20) | uint64_t(b.layer);
        std::optional<EventId> dep;
        auto it = layer_event_.find(key);
        if (it != layer_event_.end()) dep = it->second;
        uint64_t objs = uint64_t(std::max(1.0, std::round(b.bytes / double(cfg_.object_bytes()))));
        queue_submission(Submission{int(b.request), b.layer, IoKind::Write, b.device, b.bytes, objs,
                                    b.iocbs, sm_budget, true, dep},
                         t);
    }

    void submit_layer_writes(int req, int layer, double t) {
        ReqState& s = reqs_[req];
        double bytes = write_layer_bytes(s);
        if (mode_ == BackendMode::HbmOnly || bytes <= 0) return;

        if (mode_ == BackendMode::DramLw) {
            double submit_t = cpu_reserve(t, cfg_.layer_launch_cost);
            queue_submission(Submission{req, layer, IoKind::Write, dram_dev_, bytes, 0, 1, 1, false,
                                        std::nullopt},
                             submit_t);
            return;
        }
        auto demand = ssd_batches(s, req, layer, IoKind::Write);
        if (mode_ == BackendMode::Tutti) {
            for (const IoBatch& b : demand) {
                try {
                    sched_->defer(b);
                } catch (const Error& e) {
                    if (e.code() != Errc::backpressure) throw;
                    // Queue overflow: flush immediately rather than drop.
                    issue_write_batch(b, cfg_.io_max_sms, t);
                }
            }
            return;
        }
        // GdsLike and SsdBaseline push writes through the CPU path.
        double cpu = double(chunks_for_tokens(s.new_tokens)) * cfg_.cpu_submit_latency;
        double from = t;
        if (mode_ == BackendMode::SsdBaseline) from += bytes / cfg_.dram_bw; // bounce copy first
        double per_flow = demand.empty() ? 0 : cpu / double(demand.size());
        for (const IoBatch& b : demand) {
            queue_submission(Submission{req, layer, IoKind::Write, b.device, b.bytes, 0, 1, 1, false,
                                        std::nullopt},
                             cpu_reserve(from, per_flow));
            if (mode_ == BackendMode::SsdBaseline) s.writes_remaining[layer]++;
        }
    }

    // --- lifecycle -------------------------------------------------------

    void start_prefill(int req, double t) {
        ReqState& s = reqs_[req];
        gpu_busy_ = true;
        active_req_ = req;
        s.rec.queue_wait_s = t - s.r.arrival_s;
        submit_layer_reads(req, 0, t);
        try_enter_layer(req, 0, t);
    }

    void mark_reads_ready(int req, int layer, double t) {
        ReqState& s = reqs_[req];
        double ready = t;
        if (mode_ == BackendMode::SsdBaseline && ssd_read_layer_bytes(s) > 0)
            ready += ssd_read_layer_bytes(s) / cfg_.dram_bw; // bounce out of DRAM
        s.reads_ready_at[layer] = ready;
        if (s.waiting_layer == layer) {
            s.rec.bubble_s += ready - s.wait_start;
            s.waiting_layer = -1;
            schedule(ready, EvKind::LayerStart, uint64_t(req), uint64_t(layer));
        }
    }

    void try_enter_layer(int req, int layer, double t) {
        ReqState& s = reqs_[req];
        if (s.reads_remaining[layer] < 0) submit_layer_reads(req, layer, t);
        if (s.reads_ready_at[layer] >= 0) {
            double ready = s.reads_ready_at[layer];
            if (ready > t) s.rec.bubble_s += ready - t;
            s.waiting_layer = -1;
            schedule(std::max(ready, t), EvKind::LayerStart, uint64_t(req), uint64_t(layer));
        } else {
            s.waiting_layer = layer;
            s.wait_start = t;
        }
    }

    void on_layer_start(int req, int layer) {
        ReqState& s = reqs_[req];
        double c = layer_prefill_time(mc_, double(s.l_new), double(s.l_prefix));
        s.rec.prefill_compute_s += c;
        if (prefetches() && layer + 1 < mc_.num_layers) submit_layer_reads(req, layer + 1, now_);
        schedule(now_ + c, EvKind::LayerEnd, uint64_t(req), uint64_t(layer));
    }

    void on_layer_end(int req, int layer) {
        ReqState& s = reqs_[req];
        uint64_t key = (uint64_t(req) << 20) | uint64_t(layer);
        EventId ev = next_event_id_++;
        layer_event_[key] = ev;
        event_signal_[ev] = now_;

        submit_layer_writes(req, layer, now_);

        if (layer + 1 >= mc_.num_layers) {
            on_first_token(req, now_);
            return;
        }
        if (mode_ == BackendMode::SsdBaseline) {
            s.waiting_layer = layer + 1;
            s.wait_start = now_;
            if (s.writes_remaining[layer] == 0) submit_layer_reads(req, layer + 1, now_);
            // else reads are chained from the last write completion
        } else {
            try_enter_layer(req, layer + 1, now_);
        }
    }

    void on_first_token(int req, double t) {
        ReqState& s = reqs_[req];
        s.rec.ttft_s = t - s.r.arrival_s;
        if (s.r.output_tokens <= 1) {
            schedule(t, EvKind::RequestDone, uint64_t(req));
            return;
        }
        s.decode_prev = t;
        double step = decode_step_time(mc_, double(s.r.prompt_tokens + 1));
        schedule(t + step, EvKind::DecodeStep, uint64_t(req), 1);
    }

    void on_decode_step(int req, uint64_t k) {
        ReqState& s = reqs_[req];
        s.itl_sum += now_ - s.decode_prev;
        s.decode_prev = now_;
        // Write-back yields to queued prefill work: a pending request's first
        // layer reads should not contend with our deferred writes.
        if (mode_ == BackendMode::Tutti && sched_->deferred_size() > 0 && pending_.empty()) {
            IoPlan plan = sched_->plan_decode_step(int(s.r.prompt_tokens + k), *table_);
            for (const PlanItem& it : plan.writes) {
                log_plan(now_, int(it.batch.request), it.batch.layer, "write", it.batch.device,
                         it.batch.iocbs, it.in_window);
                issue_write_batch(it.batch, it.sm_budget, now_);
            }
        }
        if (k + 1 >= s.r.output_tokens) {
            s.rec.itl_mean_s = s.itl_sum / double(s.r.output_tokens - 1);
            schedule(now_, EvKind::RequestDone, uint64_t(req));
            return;
        }
        double step = decode_step_time(mc_, double(s.r.prompt_tokens + k + 1));
        schedule(now_ + step, EvKind::DecodeStep, uint64_t(req), k + 1);
    }

    void on_request_done(int req) {
        ReqState& s = reqs_[req];
        s.rec.done_s = now_;
        install_cache(s.r.prefix_group, s.r.prompt_tokens);
        gpu_busy_ = false;
        active_req_ = -1;
        if (!pending_.empty()) {
            int next = pending_.front();
            pending_.pop_front();
            start_prefill(next, now_);
        } else if (mode_ == BackendMode::Tutti) {
            // Idle: flush the deferred write queue best-effort.
            while (sched_->deferred_size() > 0) {
                IoBatch b = sched_->pop_deferred();
                log_plan(now_, int(b.request), b.layer, "write", b.device, b.iocbs, false);
                issue_write_batch(b, cfg_.io_max_sms, now_);
            }
        }
    }

    void on_io_complete(uint64_t flow_id) {
        auto it = flows_.find(flow_id);
        if (it == flows_.end()) return;
        Flow f = it->second;
        flows_.erase(it);
        if (f.via_ring) {
            ring_->complete(f.iocb);
            ring_->try_wait_cqe(f.iocb); // fine-grained reap frees the slot
            retry_backlog(now_);
        }
        ReqState& s = reqs_[f.req];
        if (f.kind == IoKind::Read) {
            if (f.layer < int(s.reads_remaining.size()) && s.reads_remaining[f.layer] > 0) {
                if (--s.reads_remaining[f.layer] == 0) mark_reads_ready(f.req, f.layer, now_);
            }
        } else if (mode_ == BackendMode::SsdBaseline) {
            if (f.layer < int(s.writes_remaining.size()) && s.writes_remaining[f.layer] > 0) {
                if (--s.writes_remaining[f.layer] == 0 && f.layer + 1 < mc_.num_layers &&
                    s.waiting_layer == f.layer + 1)
                    submit_layer_reads(f.req, f.layer + 1, now_);
            }
        }
    }

    // --- members ---------------------------------------------------------

    SimConfig cfg_;
    ModelConfig mc_;
    BackendMode mode_;
    std::vector<Device> devices_;
    int dram_dev_ = 0;
    std::optional<Pool> pool_;
    std::optional<P2PTable> p2p_;
    std::optional<SlackTable> owned_table_;
    const SlackTable* table_ = nullptr;
    std::optional<Ring> ring_;
    std::optional<SlackScheduler> sched_;
    std::ostream* tlog_;

    std::priority_queue<Ev, std::vector<Ev>, EvLater> pq_;
    double now_ = 0;
    uint64_t seq_ = 0;
    uint64_t hash_ = 1469598103934665603ULL;
    std::vector<uint64_t> dev_stamp_;
    double cpu_free_ = 0;

    std::vector<ReqState> reqs_;
    std::deque<int> pending_;
    bool gpu_busy_ = false;
    int active_req_ = -1;

    std::unordered_map<uint64_t, Flow> flows_;
    uint64_t next_flow_ = 1;
    std::vector<Submission> subs_;
    std::deque<uint64_t> ring_backlog_;

    std::unordered_map<uint64_t, double> event_signal_;
    std::unordered_map<uint64_t, EventId> layer_event_;
    uint64_t next_event_id_ = 1;

    struct Group {
        uint64_t cached = 0;
        int tier = -1;
    };
    std::unordered_map<uint32_t, Group> groups_;
    std::vector<std::list<uint32_t>> tier_lru_ = std::vector<std::list<uint32_t>>(3);
    std::vector<uint64_t> tier_used_ = std::vector<uint64_t>(3, 0);

    std::unordered_map<uint32_t, uint64_t> file_last_use_;
    uint64_t use_seq_ = 0;

    uint64_t immediate_overflows_ = 0;
    uint64_t rw_overlap_ = 0;
};

SimReport Engine::run(const std::vector<Request>& trace) {
    reqs_.clear();
    reqs_.reserve(trace.size());
    for (size_t i = 0; i < trace.size(); ++i) {
        ReqState s;
        s.r = trace[i];
        s.rec.id = i;
        s.rec.arrival_s = s.r.arrival_s;
        s.rec.prompt_tokens = s.r.prompt_tokens;
        s.rec.output_tokens = s.r.output_tokens;
        reqs_.push_back(std::move(s));
        schedule(trace[i].arrival_s, EvKind::Arrival, i);
    }

    while (!pq_.empty()) {
        Ev e = pq_.top();
        pq_.pop();
        now_ = e.t;
        switch (e.kind) {
        case EvKind::DeviceService: {
            int dev = int(e.a);
            if (e.b != dev_stamp_[dev]) break; // stale deadline
            auto done = devices_[dev].advance_to(now_);
            for (uint64_t flow : done)
                schedule(now_ + devices_[dev].config().base_latency, EvKind::IoComplete, flow);
            bump_device(dev);
            break;
        }
        case EvKind::IoSubmit:
            start_submission(e.a, now_);
            break;
        case EvKind::IoComplete:
            log_event(e);
            on_io_complete(e.a);
            break;
        case EvKind::LayerEnd:
            log_event(e);
            on_layer_end(int(e.a), int(e.b));
            break;
        case EvKind::LayerStart:
            log_event(e);
            on_layer_start(int(e.a), int(e.b));
            break;
        case EvKind::DecodeStep:
            log_event(e);
            on_decode_step(int(e.a), e.b);
            break;
        case EvKind::Arrival: {
            log_event(e);
            int req = int(e.a);
            admit(reqs_[req]);
            if (!gpu_busy_) start_prefill(req, now_);
            else pending_.push_back(req);
            break;
        }
        case EvKind::RequestDone:
            log_event(e);
            on_request_done(int(e.a));
            break;
        }
    }

    SimReport rep;
    rep.mode = mode_name(mode_);
    rep.seed = cfg_.seed;
    rep.wall_s = now_;
    rep.event_log_hash = hash_;
    rep.immediate_read_overflows = immediate_overflows_;
    rep.rw_overlap_events = rw_overlap_;
    for (ReqState& s : reqs_) {
        rep.total_compute_s += s.rec.prefill_compute_s;
        rep.total_bubble_s += s.rec.bubble_s;
        rep.total_output_tokens += s.r.output_tokens;
        rep.requests.push_back(s.rec);
    }
    std::ostringstream csv;
    csv << Device::timeline_csv_header() << '\n';
    for (const Device& d : devices_) {
        DeviceStats ds;
        ds.device = d.id();
        ds.bytes_read = d.bytes_moved(IoKind::Read);
        ds.bytes_written = d.bytes_moved(IoKind::Write);
        ds.read_active_s = d.active_time(IoKind::Read);
        ds.write_active_s = d.active_time(IoKind::Write);
        ds.mixed_active_s = d.mixed_time();
        ds.peak_bw = d.peak_bw();
        rep.devices.push_back(ds);
        csv << d.timeline_csv();
    }
    rep.device_timeline_csv = csv.str();
    return rep;
}

} // namespace

SlackTable build_table_for(const SimConfig& cfg) {
    double iocb_bytes = double(cfg.profile_ioctx_per_iocb) * double(cfg.object_bytes());
    IoKernelProfile prof =
        build_io_profile(cfg.ring_depth, iocb_bytes, double(cfg.num_devices) * cfg.device.read_bw,
                         cfg.device.base_latency, cfg.io_sm_per_iocb, cfg.io_max_sms);
    return build_slack_table(cfg.model, cfg.max_input_tokens, cfg.max_prefix_tokens, cfg.grid_step,
                             std::move(prof));
}

SimReport run_simulation(const SimConfig& cfg, const std::vector<Request>& trace,
                         const SlackTable* table, std::ostream* trace_out) {
    Engine eng(cfg, table, trace_out);
    return eng.run(trace);
}

std::string sweep_csv_header() {
    return "mode,rps_or_hitrate,ttft_mean,itl_mean,bubble_s,compute_s,cost_per_mtok";
}

std::string sweep_row_csv(const SweepRow& r) {
    std::ostringstream os;
    os.precision(9);
    os << r.mode << ',' << r.x << ',' << r.ttft_mean << ',' << r.itl_mean << ',' << r.bubble_s
       << ',' << r.compute_s << ',' << r.cost_per_mtok;
    return os.str();
}

std::vector<SweepRow> run_hit_rate_sweep(const SimConfig& base, const std::vector<Request>& trace,
                                         const std::vector<BackendMode>& modes,
                                         const std::vector<double>& hit_rates) {
    std::vector<SweepRow> rows;
    for (BackendMode m : modes) {
        for (double h : hit_rates) {
            SimConfig cfg = base;
            cfg.mode = m;
            cfg.forced_hit_rate = h;
            SimReport rep = run_simulation(cfg, trace);
            Summary s = summarize(rep);
            SweepRow row;
            row.mode = mode_name(m);
            row.x = h;
            row.ttft_mean = s.ttft_mean;
            row.itl_mean = s.itl_mean;
            row.bubble_s = s.bubble_total_s;
            row.compute_s = s.compute_total_s;
            CostParams cp = base.cost;
            double th = rep.wall_s > 0 ? double(rep.total_output_tokens) / rep.wall_s * 3600.0 : 0;
            cp.throughput = th > 0 ? th : 1;
            row.cost_per_mtok = cost_per_million(cp);
            rows.push_back(row);
        }
    }
    return rows;
}

} // namespace tutti
