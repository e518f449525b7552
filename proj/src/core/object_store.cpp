#include "core/object_store.hpp"

#include <json.hpp>

namespace tutti {

int place_object(const StoreConfig& cfg, uint64_t file_ordinal, int layer, ObjKind kind) {
    uint64_t linear = 2 * uint64_t(layer) + (kind == ObjKind::Value ? 1 : 0);
    return int((file_ordinal + linear) % uint64_t(cfg.num_devices));
}

namespace {

// Objects of file `ordinal` with linear index k < limit that land on a
// device whose residue is r = (device - ordinal) mod D.
uint64_t objects_before(uint64_t limit, uint64_t residue, uint64_t d) {
    if (limit <= residue) return 0;
    return (limit - residue - 1) / d + 1;
}

} // namespace

ObjectRef object_ref(const StoreConfig& cfg, uint64_t file_ordinal, int layer, ObjKind kind) {
    const uint64_t d = uint64_t(cfg.num_devices);
    const uint64_t n = uint64_t(cfg.objects_per_file());
    const int dev = place_object(cfg, file_ordinal, layer, kind);

    // Objects from earlier files that already occupy this device,
    // grouped by the earlier file's ordinal residue.
    uint64_t before = 0;
    for (uint64_t start = 0; start < d && start < file_ordinal; ++start) {
        uint64_t files = objects_before(file_ordinal, start, d);
        uint64_t residue = (uint64_t(dev) + d - start) % d;
        before += files * objects_before(n, residue, d);
    }

    uint64_t k = 2 * uint64_t(layer) + (kind == ObjKind::Value ? 1 : 0);
    uint64_t residue = (uint64_t(dev) + d - file_ordinal % d) % d;
    uint64_t within = objects_before(k, residue, d);

    ObjectRef ref;
    ref.device_id = dev;
    ref.extent_offset = (before + within) * cfg.object_bytes();
    ref.length = cfg.object_bytes();
    return ref;
}

uint64_t object_count_for_context(int num_layers, uint64_t context_tokens, int block_tokens) {
    uint64_t blocks = (context_tokens + uint64_t(block_tokens) - 1) / uint64_t(block_tokens);
    return 2 * uint64_t(num_layers) * blocks;
}

Pool::Pool(StoreConfig cfg) : cfg_(cfg) {
    cfg_.validate();
    uint64_t total = cfg_.total_files();
    allocated_.assign(total, 0);
    hash_of_.assign(total, std::nullopt);
    for (uint64_t i = 0; i < total; ++i) free_.insert(uint32_t(i));
}

uint32_t Pool::allocate(const Hash128& prefix_hash) {
    if (index_.count(prefix_hash)) fail(Errc::duplicate_key, "duplicate prefix hash");
    if (free_.empty()) fail(Errc::pool_exhausted, "no free GPU file");
    uint32_t id = *free_.begin();
    free_.erase(free_.begin());
    allocated_[id] = 1;
    hash_of_[id] = prefix_hash;
    index_.emplace(prefix_hash, id);
    return id;
}

std::optional<uint32_t> Pool::lookup(const Hash128& prefix_hash) const {
    auto it = index_.find(prefix_hash);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

void Pool::release(uint32_t file_id) {
    if (file_id >= allocated_.size() || !allocated_[file_id])
        fail(Errc::not_allocated, "release of non-allocated file " + std::to_string(file_id));
    allocated_[file_id] = 0;
    index_.erase(*hash_of_[file_id]);
    hash_of_[file_id] = std::nullopt;
    free_.insert(file_id);
}

bool Pool::is_allocated(uint32_t file_id) const {
    return file_id < allocated_.size() && allocated_[file_id];
}

std::string Pool::dump_json() const {
    nlohmann::ordered_json out = nlohmann::ordered_json::array();
    for (uint64_t id = 0; id < allocated_.size(); ++id) {
        nlohmann::ordered_json f;
        f["file_id"] = id;
        f["state"] = allocated_[id] ? "allocated" : "free";
        auto objs = nlohmann::ordered_json::array();
        for (int layer = 0; layer < cfg_.num_layers; ++layer) {
            for (ObjKind kind : {ObjKind::Key, ObjKind::Value}) {
                ObjectRef r = object_ref(cfg_, id, layer, kind);
                objs.push_back({{"layer", layer},
                                {"kind", kind == ObjKind::Key ? "key" : "value"},
                                {"device", r.device_id},
                                {"offset", r.extent_offset},
                                {"length", r.length}});
            }
        }
        f["objects"] = std::move(objs);
        out.push_back(std::move(f));
    }
    return out.dump();
}

} // namespace tutti
