#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <tuple>
#include <unordered_map>
#include <utility>
#include <vector>

#include "lsmrum/types.hpp"

namespace lsmrum {

// In-memory update memo: ObjectId -> (latest delete/update timestamp,
// count of obsolete copies across all components). Fully thread-safe:
// per-entry atomics plus a striped map with atomic create / conditional
// remove. Entries live behind shared_ptr so a concurrent updater that
// already holds one survives the entry being removed from the map.
class UpdateMemo {
public:
    struct Entry {
        std::atomic<Timestamp> ts;
        std::atomic<std::int64_t> cnt;
        Entry(Timestamp t, std::int64_t c) : ts(t), cnt(c) {}
    };
    using EntryPtr = std::shared_ptr<Entry>;

    UpdateMemo() = default;
    UpdateMemo(const UpdateMemo&) = delete;
    UpdateMemo& operator=(const UpdateMemo&) = delete;

    // ---- atomic protocol steps ----
    // Installs (ts, cnt) if no entry is mapped; returns nullptr on install,
    // otherwise the existing mapped entry.
    EntryPtr put_if_absent(ObjectId oid, Timestamp ts, std::int64_t cnt);

    // Compare-and-if-less-then-swap on an entry's timestamp: installs val
    // unless the stored value is already >= val. Returns the value the field
    // resolved to (val on a won swap, the larger current value otherwise).
    Timestamp cils_entry(Entry& e, Timestamp val);

    // Map-level CILS; the entry must exist (caller bug otherwise).
    Timestamp cils(ObjectId oid, Timestamp val);

    static void inc_cnt(Entry& e) { e.cnt.fetch_add(1, std::memory_order_relaxed); }

    // Increments cnt only while `e` is still the entry mapped for oid,
    // atomically with respect to remove_if_zero. Returns false if the
    // mapping vanished (or was replaced) so the caller can re-create it.
    bool inc_cnt_if_mapped(ObjectId oid, const EntryPtr& e);

    // Atomic decrement of the mapped entry's cnt; returns the new value.
    // The entry must exist.
    std::int64_t dec_cnt(ObjectId oid);

    // Erases the mapped entry only if its cnt is still 0 at that moment.
    bool remove_if_zero(ObjectId oid);

    // ---- composed operations ----
    // Registers one more obsolete copy of oid stamped at ts: creates
    // <ts, 1> if absent, otherwise advances ts via CILS and increments cnt.
    // If the entry vanished mid-flight it is re-created with the resolved
    // timestamp.
    void record_obsolete(ObjectId oid, Timestamp ts);

    // One obsolete copy of oid was physically removed from the index:
    // decrements cnt; the caller that observes 0 removes the entry (the
    // remove fires only while cnt is still 0). Returns the remaining count.
    std::int64_t clean_one(ObjectId oid);

    // Keeps a candidate iff it has no memo entry or its timestamp matches
    // the entry's. Order-preserving. A candidate newer than its entry is an
    // engine invariant violation: dropped from the results but counted.
    std::vector<ObjectRecord> validate(const std::vector<ObjectRecord>& candidates) const;

    // ---- read access ----
    std::optional<std::pair<Timestamp, std::int64_t>> lookup(ObjectId oid) const;
    std::size_t size() const { return size_.load(std::memory_order_relaxed); }
    // High-water mark of size() over the memo's lifetime.
    std::size_t max_size() const { return max_size_.load(std::memory_order_relaxed); }
    std::vector<std::tuple<ObjectId, Timestamp, std::int64_t>> snapshot() const;

    std::uint64_t validation_anomalies() const { return anomalies_.load(std::memory_order_relaxed); }
    // Failed CAS attempts inside CILS; diagnostic for contention tests.
    std::uint64_t cils_spins() const { return spins_.load(std::memory_order_relaxed); }

    void clear();

private:
    static constexpr std::size_t kStripes = 64;

    struct Stripe {
        mutable std::mutex mu;
        std::unordered_map<ObjectId, EntryPtr> map;
    };

    Stripe& stripe_for(ObjectId oid) { return stripes_[stripe_index(oid)]; }
    const Stripe& stripe_for(ObjectId oid) const { return stripes_[stripe_index(oid)]; }
    static std::size_t stripe_index(ObjectId oid) {
        return static_cast<std::size_t>((oid * 0x9E3779B97F4A7C15ull) >> 58);
    }

    void note_insert();

    Stripe stripes_[kStripes];
    std::atomic<std::size_t> size_{0};
    std::atomic<std::size_t> max_size_{0};
    mutable std::atomic<std::uint64_t> anomalies_{0};
    std::atomic<std::uint64_t> spins_{0};
};

}  // namespace lsmrum
