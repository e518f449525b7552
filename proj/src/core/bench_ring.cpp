#include "core/bench_ring.hpp"

#include <chrono>
#include <random>
#include <thread>

namespace tutti {

namespace {

struct Slot {
    std::atomic<uint8_t> event{0};
    uint64_t payload = 0;
};

void spin(uint32_t n) {
    volatile uint32_t sink = 0;
    for (uint32_t i = 0; i < n; ++i) sink = sink + 1;
}

} // namespace

BenchResult bench_ring(uint32_t depth, uint64_t ops, int threads, uint64_t seed) {
    if (depth == 0 || ops == 0) fail(Errc::invalid_config, "bench-ring: depth and ops must be >= 1");
    if (threads != 1 && threads != 2) fail(Errc::invalid_config, "bench-ring: threads must be 1 or 2");

    SpscQueue sq(depth), cq(depth);
    std::vector<Slot> slots(depth);
    std::vector<uint32_t> freelist;
    freelist.reserve(depth);
    for (uint32_t i = 0; i < depth; ++i) freelist.push_back(i);

    std::vector<uint8_t> completions(ops, 0);
    BenchResult res;
    res.ops = ops;

    uint64_t submitted = 0, reaped = 0, inflight = 0;
    std::mt19937_64 consumer_rng(seed ^ 0x5bd1e995);

    auto consume_one = [&]() -> bool {
        auto id = sq.pop();
        if (!id) return false;
        Slot& s = slots[*id];
        if (s.event.load(std::memory_order_acquire) != 1) res.dependency_violations++;
        uint64_t sequence = s.payload;
        spin(uint32_t(consumer_rng() % 64)); // randomized service duration
        if (sequence < ops) {
            if (completions[sequence]) res.duplicated++;
            completions[sequence]++;
        }
        s.event.store(0, std::memory_order_relaxed);
        while (!cq.push(*id)) std::this_thread::yield();
        return true;
    };

    auto produce_step = [&]() -> bool {
        bool progressed = false;
        if (submitted < ops && !freelist.empty()) {
            uint32_t id = freelist.back();
            Slot& s = slots[id];
            s.payload = submitted;
            s.event.store(1, std::memory_order_release);
            if (sq.push(id)) {
                freelist.pop_back();
                submitted++;
                inflight++;
                progressed = true;
            } else {
                s.event.store(0, std::memory_order_relaxed);
            }
        }
        while (auto id = cq.pop()) {
            freelist.push_back(*id);
            inflight--;
            reaped++;
            progressed = true;
        }
        if (freelist.size() + inflight != depth) res.conservation_violations++;
        return progressed;
    };

    auto start = std::chrono::steady_clock::now();

    if (threads == 2) {
        std::thread consumer([&] {
            uint64_t handled = 0;
            while (handled < ops) {
                if (consume_one())
                    handled++;
                else
                    std::this_thread::yield(); // matters on single-core hosts
            }
        });
        while (reaped < ops)
            if (!produce_step()) std::this_thread::yield();
        consumer.join();
    } else {
        while (reaped < ops) {
            produce_step();
            consume_one();
        }
    }

    auto end = std::chrono::steady_clock::now();
    res.seconds = std::chrono::duration<double>(end - start).count();
    res.ops_per_sec = res.seconds > 0 ? double(ops) / res.seconds : 0;

    for (uint64_t i = 0; i < ops; ++i)
        if (completions[i] == 0) res.lost++;
    res.verified = res.lost == 0 && res.duplicated == 0 && res.dependency_violations == 0 &&
                   res.conservation_violations == 0 && inflight == 0 && freelist.size() == depth;
    return res;
}

} // namespace tutti
