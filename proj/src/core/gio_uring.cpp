#include "core/gio_uring.hpp"

#include <algorithm>

namespace tutti {

Ring::Ring(uint32_t depth, uint32_t ioctx_per_iocb) : depth_(depth), ioctx_per_iocb_(ioctx_per_iocb) {
    if (depth == 0 || ioctx_per_iocb == 0) fail(Errc::invalid_config, "ring depth and ioctx capacity must be >= 1");
    slots_.resize(depth);
    ever_issued_.assign(depth, 0);
    for (uint32_t i = 0; i < depth; ++i) slots_[i].index = i;
}

std::vector<uint32_t> Ring::get_iocb(uint32_t nums, std::optional<EventId> event) {
    if (nums > count(SlotState::Free)) fail(Errc::ring_full, "not enough free IOCB slots");
    std::vector<uint32_t> out;
    out.reserve(nums);
    for (uint32_t i = 0; i < depth_ && out.size() < nums; ++i) {
        if (slots_[i].state == SlotState::Free) {
            slots_[i].state = SlotState::Prepared;
            slots_[i].dependency = event;
            out.push_back(i);
        }
    }
    return out;
}

Iocb& Ring::slot(uint32_t id) {
    if (id >= depth_) fail(Errc::out_of_range, "iocb index out of range");
    return slots_[id];
}

const Iocb& Ring::slot(uint32_t id) const {
    if (id >= depth_) fail(Errc::out_of_range, "iocb index out of range");
    return slots_[id];
}

void Ring::issue(const std::vector<uint32_t>& ids, int sm_budget) {
    if (sm_budget < 1) fail(Errc::zero_sm_budget, "issue_io requires sm_budget >= 1");
    for (uint32_t id : ids) {
        const Iocb& s = slot(id);
        if (s.state != SlotState::Prepared)
            fail(Errc::not_prepared, "iocb " + std::to_string(id) + " not in Prepared state");
        if (s.ioctxs.size() > ioctx_per_iocb_)
            fail(Errc::too_many_contexts, "iocb " + std::to_string(id) + " exceeds ioctx capacity");
    }
    for (uint32_t id : ids) {
        slots_[id].state = SlotState::Issued;
        slots_[id].sm_budget = sm_budget;
        ever_issued_[id] = 1;
        sq_.push_back(id);
    }
}

std::optional<uint32_t> Ring::sq_pop() {
    if (sq_.empty()) return std::nullopt;
    uint32_t id = sq_.front();
    sq_.pop_front();
    return id;
}

void Ring::complete(uint32_t id) {
    Iocb& s = slot(id);
    if (s.state != SlotState::Issued)
        fail(Errc::not_prepared, "completion for iocb not in Issued state");
    s.state = SlotState::Completed;
    cq_.push_back(id);
}

CompletionStatus Ring::reap(uint32_t id) {
    Iocb& s = slots_[id];
    CompletionStatus st;
    st.iocb_index = id;
    for (const Ioctx& c : s.ioctxs) st.bytes += c.length;
    s.state = SlotState::Free;
    s.ioctxs.clear();
    s.dependency.reset();
    return st;
}

std::optional<CompletionStatus> Ring::try_wait_cqe(uint32_t id) {
    if (id >= depth_ || !ever_issued_[id]) fail(Errc::never_issued, "wait_cqe on never-issued iocb");
    auto it = std::find(cq_.begin(), cq_.end(), id);
    if (it == cq_.end()) return std::nullopt;
    cq_.erase(it);
    return reap(id);
}

std::optional<uint32_t> Ring::poll_cqe() {
    if (cq_.empty()) return std::nullopt;
    uint32_t id = cq_.front();
    cq_.pop_front();
    reap(id);
    return id;
}

size_t Ring::count(SlotState s) const {
    size_t n = 0;
    for (const Iocb& i : slots_)
        if (i.state == s) ++n;
    return n;
}

} // namespace tutti
