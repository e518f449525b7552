#pragma once

#include <atomic>
#include <cstdint>
#include <optional>
#include <vector>

#include "core/error.hpp"

namespace tutti {

// Bounded single-producer/single-consumer queue of slot indices. Head is
// written only by the consumer, tail only by the producer; release/acquire
// pairs publish entries.
class SpscQueue {
public:
    explicit SpscQueue(uint32_t capacity)
        : cap_(capacity + 1), buf_(capacity + 1), head_(0), tail_(0) {}

    bool push(uint32_t v) {
        uint32_t t = tail_.load(std::memory_order_relaxed);
        uint32_t next = (t + 1) % cap_;
        if (next == head_.load(std::memory_order_acquire)) return false;
        buf_[t] = v;
        tail_.store(next, std::memory_order_release);
        return true;
    }

    std::optional<uint32_t> pop() {
        uint32_t h = head_.load(std::memory_order_relaxed);
        if (h == tail_.load(std::memory_order_acquire)) return std::nullopt;
        uint32_t v = buf_[h];
        head_.store((h + 1) % cap_, std::memory_order_release);
        return v;
    }

private:
    uint32_t cap_;
    std::vector<uint32_t> buf_;
    std::atomic<uint32_t> head_;
    std::atomic<uint32_t> tail_;
};

struct BenchResult {
    uint64_t ops = 0;
    double seconds = 0;
    double ops_per_sec = 0;
    bool verified = false;
    uint64_t lost = 0;
    uint64_t duplicated = 0;
    uint64_t dependency_violations = 0;
    uint64_t conservation_violations = 0;
};

// Drives the ring protocol with real threads: the producer acquires free
// slots, signals the slot's dependency event, and submits through the SQ;
// the consumer executes and posts to the CQ; the producer reaps. With
// threads == 1 both roles interleave on one thread.
BenchResult bench_ring(uint32_t depth, uint64_t ops, int threads, uint64_t seed);

} // namespace tutti
