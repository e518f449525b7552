#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <vector>

#include "core/compute_profile.hpp"
#include "core/error.hpp"
#include "core/gio_uring.hpp"

namespace tutti {

// One device-local batch of IOCBs to launch.
struct IoBatch {
    int device = 0;
    int iocbs = 0;
    double bytes = 0;
    int layer = 0;
    uint64_t request = 0;
    IoKind kind = IoKind::Read;
};

struct PlanItem {
    IoBatch batch;
    int sm_budget = 0;
    bool in_window = false;
    int window_index = -1;
};

struct IoPlan {
    std::vector<PlanItem> reads;
    std::vector<PlanItem> writes;
    int immediate_read_batches = 0;
};

// Slack-aware decoupled read/write planner. Reads fill profiled windows
// first (overflow launches immediately rather than stalling compute);
// writes take leftover window capacity, never sharing a device with reads
// in the same window, and otherwise stay in a FIFO deferred queue that is
// drained best-effort during decode.
class SlackScheduler {
public:
    SlackScheduler(size_t deferred_cap, int default_sm_budget)
        : deferred_cap_(deferred_cap), default_sm_budget_(default_sm_budget) {}

    IoPlan plan_prefill_layer(std::vector<IoBatch> read_demand, int l_input, int l_prefix,
                              const SlackTable& table);

    IoPlan plan_decode_step(int context_len, const SlackTable& table);

    // Writes of layer l depend on layer l's compute completion; reads
    // depend on nothing beyond submission.
    static std::optional<int> dependency_layer(const IoBatch& b) {
        if (b.kind == IoKind::Write) return b.layer;
        return std::nullopt;
    }

    void defer(IoBatch write_batch);
    IoBatch pop_deferred() {
        IoBatch b = deferred_.front();
        deferred_.pop_front();
        return b;
    }
    size_t deferred_size() const { return deferred_.size(); }
    const std::deque<IoBatch>& deferred() const { return deferred_; }

private:
    size_t deferred_cap_;
    int default_sm_budget_;
    std::deque<IoBatch> deferred_;
};

} // namespace tutti
