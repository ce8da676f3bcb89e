#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <set>
#include <shared_mutex>
#include <vector>

#include "lsmrum/component_file.hpp"
#include "lsmrum/config.hpp"
#include "lsmrum/rtree.hpp"
#include "lsmrum/stats.hpp"
#include "lsmrum/timestamp.hpp"

namespace lsmrum {

// Eager baseline: each R-tree is paired with a deleted-key set. A delete
// removes the old record from the memory tree (found via the caller-supplied
// old location) and records the key; queries drop any candidate whose key
// appears in a deleted-key set of a newer component.
class EagerIndex {
public:
    explicit EagerIndex(EngineConfig cfg = {});
    ~EagerIndex();

    Timestamp insert(ObjectId oid, Location loc);
    Timestamp remove(ObjectId oid, Location old_loc);
    Timestamp update(ObjectId oid, Location old_loc, Location new_loc);

    std::vector<ObjectRecord> query(const Rect& window);

    std::optional<std::uint64_t> force_flush();
    EngineStats stats() const;

private:
    struct Component {
        std::uint64_t id = 0;
        storage::PackedRecords data;
        std::vector<ObjectId> deleted_keys;  // sorted
        std::filesystem::path records_path;
        std::filesystem::path deleted_path;
    };

    void ensure_room_for_record();
    std::uint64_t flush_locked();
    void maybe_merge_locked();
    bool key_deleted_after(ObjectId oid, std::size_t level) const;

    EngineConfig cfg_;
    TimestampClock clock_;

    mutable std::shared_mutex mu_;
    std::unique_ptr<Rtree> mem_;
    std::set<ObjectId> mem_deleted_;
    std::vector<std::shared_ptr<Component>> disk_;  // oldest -> newest
    std::uint64_t next_component_id_ = 1;

    std::uint64_t flush_count_ = 0;
    std::uint64_t merge_count_ = 0;

    bool owns_data_dir_ = false;
    std::filesystem::path data_dir_;
};

}  // namespace lsmrum
