#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <vector>

#include "core/error.hpp"

namespace tutti {

enum class IoKind : uint8_t { Read = 0, Write = 1 };

using EventId = uint64_t;

// One GPU I/O context: a single object transfer described by an SGL
// reference plus its location within the GPU file.
struct Ioctx {
    uint32_t sgl_ref = 0; // index into the P2P table
    uint64_t file_offset = 0;
    uint32_t length = 0;
    IoKind kind = IoKind::Read;
    int device_id = 0;
};

enum class SlotState : uint8_t { Free = 0, Prepared, Issued, Completed };

struct Iocb {
    uint32_t index = 0;
    std::vector<Ioctx> ioctxs;
    std::optional<EventId> dependency;
    SlotState state = SlotState::Free;
    int sm_budget = 0; // recorded at issue time
};

struct CompletionStatus {
    uint32_t iocb_index = 0;
    uint64_t bytes = 0;
};

// Deterministic sim-time ring: SQ/CQ of fixed depth, slot lifecycle
// Free -> Prepared -> Issued -> Completed -> Free. Submission is driven
// by the DES engine, which calls complete() when the simulated transfer
// finishes; CQ order is therefore completion-time order.
class Ring {
public:
    explicit Ring(uint32_t depth, uint32_t ioctx_per_iocb = 2048);

    uint32_t depth() const { return depth_; }
    uint32_t ioctx_per_iocb() const { return ioctx_per_iocb_; }

    std::vector<uint32_t> get_iocb(uint32_t nums, std::optional<EventId> event = std::nullopt);
    Iocb& slot(uint32_t id);
    const Iocb& slot(uint32_t id) const;

    // Validates and moves Prepared -> Issued, appending to SQ in order.
    void issue(const std::vector<uint32_t>& ids, int sm_budget);

    // Engine side: drain SQ to start simulated I/O kernels.
    std::optional<uint32_t> sq_pop();

    // Engine side: simulated kernel finished; exactly-once append to CQ.
    void complete(uint32_t id);

    // Reap a specific index once it is in the CQ; nullopt while pending.
    std::optional<CompletionStatus> try_wait_cqe(uint32_t id);
    // Reap head-of-CQ if any.
    std::optional<uint32_t> poll_cqe();

    size_t count(SlotState s) const;
    size_t sq_size() const { return sq_.size(); }
    size_t cq_size() const { return cq_.size(); }

private:
    CompletionStatus reap(uint32_t id);

    uint32_t depth_;
    uint32_t ioctx_per_iocb_;
    std::vector<Iocb> slots_;
    std::vector<uint8_t> ever_issued_;
    std::deque<uint32_t> sq_;
    std::deque<uint32_t> cq_;
};

} // namespace tutti
