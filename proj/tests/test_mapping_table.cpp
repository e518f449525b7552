#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "core/mapping_table.hpp"

using namespace tutti;

namespace {
constexpr uint64_t kGiB = uint64_t(1) << 30;
}

TEST_CASE("footprints for a 60 GiB cache") {
    uint64_t cache = 60 * kGiB;
    CHECK(prp_footprint_bytes(cache) == 4026531840ULL);
    CHECK(sgl_footprint_bytes(cache) == 15728640ULL);
    CHECK(prp_footprint_bytes(cache) / sgl_footprint_bytes(cache) == 256);

    P2PTable table(0x1000, cache);
    CHECK(table.entry_count() == cache / 65536);
    CHECK(table.table_bytes() == sgl_footprint_bytes(cache));
}

TEST_CASE("table entries are 16 bytes and chunk-aligned") {
    P2PTable t(0x4000, 5 * 65536 + 100); // non-multiple region pads the tail
    CHECK(t.entry_count() == 6);
    for (uint64_t i = 0; i < t.entry_count(); ++i) {
        CHECK(t.entry(i).physical_address == 0x4000 + i * 65536);
        CHECK(t.entry(i).length == 65536);
        CHECK(t.entry(i).identifier == i);
    }
}

TEST_CASE("translate covers exact ranges") {
    P2PTable t(0, 4 * 65536);
    auto one = t.translate(100, 200);
    REQUIRE(one.size() == 1);
    CHECK(one[0].physical_address == 100);
    CHECK(one[0].length == 200);
    CHECK(one[0].identifier == 0);

    auto spanning = t.translate(65536 - 10, 20);
    REQUIRE(spanning.size() == 2);
    CHECK(spanning[0].length == 10);
    CHECK(spanning[1].physical_address == 65536);
    CHECK(spanning[1].length == 10);
    CHECK(spanning[1].identifier == 1);

    CHECK_THROWS_AS(t.translate(4 * 65536 - 10, 11), Error);
    try {
        t.translate(4 * 65536, 1);
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.code() == Errc::out_of_range);
    }
}

TEST_CASE("translate fuzz against a coverage oracle") {
    uint64_t region = 37 * 65536 + 4096;
    P2PTable t(1 << 20, region);
    std::mt19937_64 rng(11);
    for (int i = 0; i < 5000; ++i) {
        uint64_t off = rng() % region;
        uint64_t len = 1 + rng() % std::min<uint64_t>(region - off, 5 * 65536);
        auto entries = t.translate(off, len);
        REQUIRE(!entries.empty());
        uint64_t cursor = off;
        uint64_t total = 0;
        for (const SglEntry& e : entries) {
            CHECK(e.physical_address == (1 << 20) + cursor);
            CHECK(e.identifier == cursor / 65536);
            CHECK(e.length <= 65536);
            cursor += e.length;
            total += e.length;
        }
        CHECK(total == len);
        // Minimality: one entry per touched chunk.
        CHECK(entries.size() == (off + len - 1) / 65536 - off / 65536 + 1);
    }
}

TEST_CASE("footprint scaling") {
    // PRP grows with per-page pointers, SGL with 16 B per 64 KiB chunk;
    // the ratio is size-independent for multiples of the chunk.
    for (uint64_t gib : {1, 8, 60}) {
        uint64_t cache = gib * kGiB;
        CHECK(sgl_footprint_bytes(cache) == cache / 65536 * 16);
        CHECK(prp_footprint_bytes(cache) / sgl_footprint_bytes(cache) == 256);
    }
}
