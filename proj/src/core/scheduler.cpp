#include "core/scheduler.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace tutti {

void SlackScheduler::defer(IoBatch write_batch) {
    if (write_batch.kind != IoKind::Write) fail(Errc::invalid_config, "defer expects a write batch");
    if (deferred_.size() >= deferred_cap_)
        fail(Errc::backpressure, "deferred write queue at capacity");
    deferred_.push_back(write_batch);
}

IoPlan SlackScheduler::plan_prefill_layer(std::vector<IoBatch> read_demand, int l_input,
                                          int l_prefix, const SlackTable& table) {
    IoPlan plan;
    // Round-robin fairness across devices when several have demand.
    std::stable_sort(read_demand.begin(), read_demand.end(),
                     [](const IoBatch& a, const IoBatch& b) { return a.device < b.device; });
    std::deque<IoBatch> reads(read_demand.begin(), read_demand.end());

    const auto& windows = table.lookup(l_input, l_prefix);
    for (size_t wi = 0; wi < windows.size(); ++wi) {
        int cap = table.max_iocbs_for_window(windows[wi]);
        std::set<int> read_devices_in_window;
        while (cap > 0 && !reads.empty()) {
            IoBatch b = reads.front();
            reads.pop_front();
            int take = std::min(cap, b.iocbs);
            IoBatch placed = b;
            placed.iocbs = take;
            placed.bytes = b.bytes * double(take) / double(b.iocbs);
            plan.reads.push_back(PlanItem{placed, windows[wi].sm_budget, true, int(wi)});
            read_devices_in_window.insert(b.device);
            cap -= take;
            if (take < b.iocbs) {
                b.iocbs -= take;
                b.bytes -= placed.bytes;
                reads.push_front(b);
            }
        }
        // Residual capacity goes to deferred writes, in FIFO order, never
        // on a device that carries reads in this window.
        while (cap > 0 && !deferred_.empty()) {
            const IoBatch& front = deferred_.front();
            if (front.iocbs > cap || read_devices_in_window.count(front.device)) break;
            plan.writes.push_back(PlanItem{front, windows[wi].sm_budget, true, int(wi)});
            cap -= front.iocbs;
            deferred_.pop_front();
        }
    }
    // Read overflow launches immediately to avoid stalling compute.
    while (!reads.empty()) {
        plan.reads.push_back(PlanItem{reads.front(), default_sm_budget_, false, -1});
        plan.immediate_read_batches++;
        reads.pop_front();
    }
    return plan;
}

IoPlan SlackScheduler::plan_decode_step(int context_len, const SlackTable& table) {
    IoPlan plan;
    const ModelConfig& m = table.model();
    SlackWindow w;
    w.duration = m.slack_frac * decode_step_time(m, context_len);
    w.sm_budget = m.total_sms - int(std::ceil(m.decode_sm_fraction * m.total_sms));
    int cap = table.max_iocbs_for_window(w);
    while (cap > 0 && !deferred_.empty() && deferred_.front().iocbs <= cap) {
        plan.writes.push_back(PlanItem{deferred_.front(), w.sm_budget, true, 0});
        cap -= deferred_.front().iocbs;
        deferred_.pop_front();
    }
    return plan;
}

} // namespace tutti
