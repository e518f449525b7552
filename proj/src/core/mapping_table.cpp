#include "core/mapping_table.hpp"

#include <algorithm>

namespace tutti {

P2PTable::P2PTable(uint64_t region_base, uint64_t region_len, uint64_t chunk_size)
    : base_(region_base), len_(region_len), chunk_(chunk_size) {
    if (chunk_ == 0) fail(Errc::invalid_config, "chunk_size must be > 0");
    if (len_ == 0) fail(Errc::invalid_config, "region_len must be > 0");
    uint64_t n = (len_ + chunk_ - 1) / chunk_; // final chunk padded
    entries_.reserve(n);
    for (uint64_t i = 0; i < n; ++i) {
        SglEntry e;
        e.physical_address = base_ + i * chunk_;
        e.length = uint32_t(chunk_);
        e.identifier = uint32_t(i);
        entries_.push_back(e);
    }
}

std::vector<SglEntry> P2PTable::translate(uint64_t virt_offset, uint64_t length) const {
    if (virt_offset >= len_ || length > len_ - virt_offset)
        fail(Errc::out_of_range, "translate range outside KV region");
    std::vector<SglEntry> out;
    uint64_t pos = virt_offset;
    uint64_t end = virt_offset + length;
    while (pos < end) {
        uint64_t idx = pos / chunk_;
        uint64_t chunk_end = (idx + 1) * chunk_;
        uint64_t take = std::min(end, chunk_end) - pos;
        SglEntry e = entries_[idx];
        e.physical_address = base_ + pos;
        e.length = uint32_t(take);
        out.push_back(e);
        pos += take;
    }
    return out;
}

uint64_t prp_footprint_bytes(uint64_t cache_bytes, uint64_t page_bytes,
                             uint64_t pointers_per_list_page, uint64_t list_page_bytes) {
    if (page_bytes == 0 || pointers_per_list_page == 0 || list_page_bytes == 0)
        fail(Errc::invalid_config, "prp footprint: all parameters must be > 0");
    uint64_t pages = (cache_bytes + page_bytes - 1) / page_bytes;
    uint64_t list_pages = (pages + pointers_per_list_page - 1) / pointers_per_list_page;
    return list_pages * list_page_bytes;
}

uint64_t sgl_footprint_bytes(uint64_t cache_bytes, uint64_t chunk_size) {
    if (chunk_size == 0) fail(Errc::invalid_config, "sgl footprint: chunk_size must be > 0");
    uint64_t chunks = (cache_bytes + chunk_size - 1) / chunk_size;
    return chunks * sizeof(SglEntry);
}

} // namespace tutti
