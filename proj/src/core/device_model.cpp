#include "core/device_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace tutti {

namespace {
constexpr double kByteEps = 1e-3; // a flow with less than this many bytes left is done
}

Device::Device(DeviceConfig cfg, int id) : cfg_(cfg), id_(id) {
    cfg_.validate();
}

void Device::submit(uint64_t flow_id, IoKind kind, double bytes, double now) {
    if (bytes <= 0) fail(Errc::invalid_transfer, "transfer bytes must be > 0");
    progress_to(now);
    flows_.push_back(Flow{flow_id, kind, bytes, 0});
    recompute_rates();
}

double Device::bytes_in_flight(IoKind kind) const {
    double b = 0;
    for (const Flow& f : flows_)
        if (f.kind == kind) b += f.remaining;
    return b;
}

void Device::progress_to(double t) {
    double dt = t - last_t_;
    if (dt < 0) fail(Errc::runtime_error, "device time moved backwards");
    if (dt > 0 && !flows_.empty()) {
        bool reads = false, writes = false;
        for (Flow& f : flows_) {
            double chunk = f.rate * dt;
            moved_[int(f.kind)] += std::min(chunk, f.remaining);
            f.remaining = std::max(0.0, f.remaining - chunk);
            (f.kind == IoKind::Read ? reads : writes) = true;
        }
        if (reads) active_[0] += dt;
        if (writes) active_[1] += dt;
        if (reads && writes) mixed_time_ += dt;
    }
    last_t_ = t;
}

void Device::recompute_rates() {
    size_t n_read = 0, n_write = 0;
    double b_read = 0, b_write = 0;
    for (const Flow& f : flows_) {
        if (f.kind == IoKind::Read) {
            ++n_read;
            b_read += f.remaining;
        } else {
            ++n_write;
            b_write += f.remaining;
        }
    }
    double rate_read = 0, rate_write = 0;
    if (n_read && !n_write) {
        rate_read = cfg_.read_bw / double(n_read);
    } else if (n_write && !n_read) {
        rate_write = cfg_.write_bw / double(n_write);
    } else if (n_read && n_write) {
        double total = cfg_.contention_factor * (cfg_.read_bw + cfg_.write_bw);
        double share_read = total * b_read / (b_read + b_write);
        rate_read = share_read / double(n_read);
        rate_write = (total - share_read) / double(n_write);
    }
    double effective = 0;
    for (Flow& f : flows_) {
        f.rate = f.kind == IoKind::Read ? rate_read : rate_write;
        effective += f.rate;
    }
    peak_bw_ = std::max(peak_bw_, effective);
    timeline_.push_back(TimelinePoint{last_t_, b_read, b_write, effective});
}

std::optional<double> Device::next_service_end() const {
    double best = std::numeric_limits<double>::infinity();
    for (const Flow& f : flows_) {
        if (f.remaining <= kByteEps) return last_t_;
        if (f.rate <= 0) continue;
        best = std::min(best, last_t_ + f.remaining / f.rate);
    }
    if (!std::isfinite(best)) return std::nullopt;
    return best;
}

std::vector<uint64_t> Device::advance_to(double t) {
    progress_to(t);
    std::vector<uint64_t> done;
    auto it = flows_.begin();
    while (it != flows_.end()) {
        if (it->remaining <= kByteEps) {
            moved_[int(it->kind)] += it->remaining;
            done.push_back(it->id);
            it = flows_.erase(it);
        } else {
            ++it;
        }
    }
    if (!done.empty()) recompute_rates();
    return done;
}

std::string Device::timeline_csv_header() {
    return "time,device,read_bytes_in_flight,write_bytes_in_flight,effective_bw";
}

std::string Device::timeline_csv() const {
    std::ostringstream os;
    os.precision(9);
    for (const TimelinePoint& p : timeline_)
        os << p.time << ',' << id_ << ',' << p.read_bytes_in_flight << ','
           << p.write_bytes_in_flight << ',' << p.effective_bw << '\n';
    return os.str();
}

std::vector<QueueRange> provision_queues(int n_gpus, int queues_per_gpu, int max_queues) {
    if (n_gpus < 1 || queues_per_gpu < 1 || max_queues < 1)
        fail(Errc::invalid_config, "provision_queues: all arguments must be >= 1");
    if (int64_t(n_gpus) * queues_per_gpu > max_queues)
        fail(Errc::queue_exhausted, "queue demand exceeds device queue count");
    std::vector<QueueRange> plan;
    plan.reserve(n_gpus);
    for (int g = 0; g < n_gpus; ++g) plan.push_back(QueueRange{g, g * queues_per_gpu, queues_per_gpu});
    return plan;
}

} // namespace tutti
