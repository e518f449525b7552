#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "core/error.hpp"

namespace tutti {

enum class ObjKind : uint8_t { Key = 0, Value = 1 };

// Sizing of the GPU file pool. A GPU file holds the KV block of one
// paged-attention block: 2*num_layers objects (one key and one value
// stream per layer), each object_bytes() long.
struct StoreConfig {
    int num_devices = 1;
    int files_per_device = 1;
    int num_layers = 1;
    int block_tokens = 64;
    uint64_t bytes_per_token_per_layer = 1280; // per K or per V stream

    uint64_t object_bytes() const { return uint64_t(block_tokens) * bytes_per_token_per_layer; }
    int objects_per_file() const { return 2 * num_layers; }
    uint64_t total_files() const { return uint64_t(num_devices) * files_per_device; }

    void validate() const {
        if (num_devices < 1 || files_per_device < 1 || num_layers < 1 || block_tokens < 1 ||
            bytes_per_token_per_layer < 1)
            fail(Errc::invalid_config, "store config: all counts must be >= 1");
    }
};

// Physical placement of one object on one device volume.
struct ObjectRef {
    int device_id = 0;
    uint64_t extent_offset = 0;
    uint64_t length = 0;
};

// Opaque 128-bit prefix identity supplied by the caller.
struct Hash128 {
    uint64_t hi = 0;
    uint64_t lo = 0;
    friend bool operator==(const Hash128&, const Hash128&) = default;
};

struct Hash128Hasher {
    size_t operator()(const Hash128& h) const noexcept {
        return std::hash<uint64_t>{}(h.hi * 0x9e3779b97f4a7c15ULL ^ h.lo);
    }
};

// Row-sequential round-robin striping: object k of file o lands on
// device (o + k) % num_devices, with k = 2*layer + (kind == Value).
int place_object(const StoreConfig& cfg, uint64_t file_ordinal, int layer, ObjKind kind);

// Full placement including the extent offset, derived arithmetically so
// the pool never stores per-object metadata.
ObjectRef object_ref(const StoreConfig& cfg, uint64_t file_ordinal, int layer, ObjKind kind);

// Objects required to reload a context: 2 * layers * ceil(tokens / block).
uint64_t object_count_for_context(int num_layers, uint64_t context_tokens, int block_tokens);

class Pool {
public:
    explicit Pool(StoreConfig cfg);

    uint32_t allocate(const Hash128& prefix_hash);
    std::optional<uint32_t> lookup(const Hash128& prefix_hash) const;
    void release(uint32_t file_id);

    bool is_allocated(uint32_t file_id) const;
    size_t free_count() const { return free_.size(); }
    size_t file_count() const { return allocated_.size() - free_.size(); }
    const StoreConfig& config() const { return cfg_; }

    ObjectRef object(uint32_t file_id, int layer, ObjKind kind) const {
        return object_ref(cfg_, file_id, layer, kind);
    }

    std::string dump_json() const;

private:
    StoreConfig cfg_;
    std::vector<uint8_t> allocated_;
    std::set<uint32_t> free_; // ordered: lowest ordinal wins
    std::vector<std::optional<Hash128>> hash_of_;
    std::unordered_map<Hash128, uint32_t, Hash128Hasher> index_;
};

} // namespace tutti
