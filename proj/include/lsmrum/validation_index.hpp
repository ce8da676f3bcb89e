#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <vector>

#include "lsmrum/component_file.hpp"
#include "lsmrum/config.hpp"
#include "lsmrum/rtree.hpp"
#include "lsmrum/stats.hpp"
#include "lsmrum/timestamp.hpp"

namespace lsmrum {

// Validation baseline: every record carries a timestamp; a primary-key index
// holds the latest timestamp per key, or a deletion marker. Queries keep a
// candidate only when its timestamp matches the key's latest and the key is
// not deletion-marked. Updates never touch old records; obsolete copies
// accumulate in the components.
class ValidationIndex {
public:
    explicit ValidationIndex(EngineConfig cfg = {});
    ~ValidationIndex();

    Timestamp insert(ObjectId oid, Location loc);
    Timestamp update(ObjectId oid, Location loc) { return insert(oid, loc); }
    Timestamp remove(ObjectId oid);

    std::vector<ObjectRecord> query(const Rect& window);

    std::optional<std::uint64_t> force_flush();
    EngineStats stats() const;

    // Test access.
    std::optional<std::pair<Timestamp, bool>> pk_lookup(ObjectId oid) const;

private:
    struct PkEntry {
        Timestamp ts = kNeverTs;
        bool deleted = false;
    };

    struct Component {
        std::uint64_t id = 0;
        storage::PackedRecords data;
        std::filesystem::path records_path;
    };

    void ensure_room_for_record();
    std::uint64_t flush_locked();
    void maybe_merge_locked();
    void snapshot_pk_locked(std::uint64_t component_id);

    EngineConfig cfg_;
    TimestampClock clock_;

    mutable std::shared_mutex mu_;
    std::unique_ptr<Rtree> mem_;
    std::map<ObjectId, PkEntry> pk_;
    std::vector<std::shared_ptr<Component>> disk_;  // oldest -> newest
    std::uint64_t next_component_id_ = 1;

    std::uint64_t flush_count_ = 0;
    std::uint64_t merge_count_ = 0;

    bool owns_data_dir_ = false;
    std::filesystem::path data_dir_;
};

}  // namespace lsmrum
