#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <vector>

#include "lsmrum/cleaning.hpp"
#include "lsmrum/component_file.hpp"
#include "lsmrum/config.hpp"
#include "lsmrum/rtree.hpp"
#include "lsmrum/stats.hpp"
#include "lsmrum/timestamp.hpp"
#include "lsmrum/update_memo.hpp"

namespace lsmrum {

// Immutable flushed/merged run. Bytes on disk never change after the rename;
// the same records are kept in memory in column form for scans.
struct DiskComponent {
    std::uint64_t id = 0;
    std::filesystem::path path;
    storage::ComponentMeta meta;
    storage::PackedRecords data;

    std::size_t record_count() const { return data.size(); }
    std::size_t byte_size() const {
        return storage::kHeaderBytes + data.size() * storage::kRecordBytes + 4;
    }
};

// LSM-based R-tree secondary index with an in-memory update memo. Deletes
// and updates only touch the memo; obsolete index entries are filtered at
// query time and physically removed by the configured cleaning strategies.
//
// Concurrency: the memo and the timestamp counter are lock-free and may be
// hit from any thread at any time. Tree mutation, flush and merge serialize
// on a writer lock; queries run under the shared side. A query overlapping
// an in-flight update may transiently miss that one object (its memo entry
// advances before its new record lands); quiescent results are exact.
class LsmRumTree {
public:
    explicit LsmRumTree(EngineConfig cfg = {});
    ~LsmRumTree();

    LsmRumTree(const LsmRumTree&) = delete;
    LsmRumTree& operator=(const LsmRumTree&) = delete;

    Timestamp ingest_insert(ObjectId oid, Location loc);
    Timestamp ingest_delete(ObjectId oid);
    Timestamp ingest_update(ObjectId oid, Location new_loc);

    std::vector<ObjectRecord> range_query(const Rect& window);

    // Flushes the memory component if it holds any records; returns the new
    // component id. Runs the post-flush merge check like an automatic flush.
    std::optional<std::uint64_t> force_flush();

    // Fires the prefix merge policy if it applies.
    std::optional<std::uint64_t> maybe_merge();

    // Merges every disk component into one, honoring the M flag. A single
    // component is rewritten (useful to purge it). No-op without components.
    std::optional<std::uint64_t> force_full_merge();

    // Purges obsolete records from every memory-tree leaf.
    std::size_t clean_memory_now();

    EngineStats stats() const;

    const EngineConfig& config() const { return cfg_; }
    TimestampClock& clock() { return clock_; }
    UpdateMemo& memo() { return memo_; }
    const UpdateMemo& memo() const { return memo_; }

    // Test access; callers must not race writers.
    const Rtree& memory_tree() const { return *mem_; }
    std::vector<std::shared_ptr<const DiskComponent>> components() const;
    std::uint64_t update_tick() const { return update_tick_; }

private:
    void ensure_room_for_record();  // writer lock held
    std::uint64_t flush_locked();
    std::uint64_t merge_locked(std::size_t count_from_newest);
    std::optional<std::uint64_t> maybe_merge_locked();
    std::filesystem::path component_path(std::uint64_t id) const;

    EngineConfig cfg_;
    TimestampClock clock_;
    UpdateMemo memo_;

    mutable std::shared_mutex mu_;
    std::unique_ptr<Rtree> mem_;
    std::vector<std::shared_ptr<DiskComponent>> disk_;  // oldest -> newest
    std::uint64_t next_component_id_ = 1;
    std::uint64_t update_tick_ = 0;

    BufferedCleaner buffered_;
    VacuumCleaner vacuum_;

    std::uint64_t flush_count_ = 0;
    std::uint64_t merge_count_ = 0;
    std::uint64_t cleaned_buffered_ = 0;
    std::uint64_t cleaned_vacuum_ = 0;
    std::uint64_t cleaned_flush_ = 0;
    std::uint64_t cleaned_merge_ = 0;
    std::uint64_t cleaned_forced_ = 0;
    mutable std::atomic<std::uint64_t> query_scanned_{0};

    bool owns_data_dir_ = false;
    std::filesystem::path data_dir_;
};

}  // namespace lsmrum
