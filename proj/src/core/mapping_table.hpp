#pragma once

#include <cstdint>
#include <vector>

#include "core/error.hpp"

namespace tutti {

// NVMe-style scatter-gather descriptor. Must serialize to exactly 16 bytes.
struct SglEntry {
    uint64_t physical_address = 0;
    uint32_t length = 0;
    uint32_t identifier = 0; // originating chunk index
};
static_assert(sizeof(SglEntry) == 16, "SglEntry must be 16 bytes");

// P2P memory mapping table over the pre-allocated KV cache region, built
// once at startup in fixed chunks and immutable thereafter.
class P2PTable {
public:
    P2PTable(uint64_t region_base, uint64_t region_len, uint64_t chunk_size = 65536);

    uint64_t region_base() const { return base_; }
    uint64_t region_len() const { return len_; }
    uint64_t chunk_size() const { return chunk_; }
    uint64_t entry_count() const { return entries_.size(); }
    uint64_t table_bytes() const { return entries_.size() * sizeof(SglEntry); }
    const SglEntry& entry(uint64_t i) const { return entries_[i]; }

    uint64_t chunk_index(uint64_t virt_offset) const { return virt_offset / chunk_; }

    // Minimal clipped descriptor list covering [virt_offset, virt_offset+length).
    std::vector<SglEntry> translate(uint64_t virt_offset, uint64_t length) const;

private:
    uint64_t base_;
    uint64_t len_;
    uint64_t chunk_;
    std::vector<SglEntry> entries_;
};

// Footprint arithmetic for the PRP descriptor scheme, keeping the exact
// convention of allocating list pages that hold pointers_per_list_page
// pointers each.
uint64_t prp_footprint_bytes(uint64_t cache_bytes, uint64_t page_bytes = 4096,
                             uint64_t pointers_per_list_page = 16, uint64_t list_page_bytes = 4096);

uint64_t sgl_footprint_bytes(uint64_t cache_bytes, uint64_t chunk_size = 65536);

} // namespace tutti
