#include "lsmrum/engine.hpp"

#include <unistd.h>

#include <algorithm>
#include <cassert>
#include <mutex>
#include <string>

#include "lsmrum/merge_policy.hpp"

namespace lsmrum {

namespace {

std::filesystem::path make_private_dir() {
    static std::atomic<std::uint64_t> seq{0};
    auto base = std::filesystem::temp_directory_path();
    auto dir = base / ("lsmrum-" + std::to_string(::getpid()) + "-" +
                       std::to_string(seq.fetch_add(1)));
    std::filesystem::create_directories(dir);
    return dir;
}

// Deterministic total order for flushed runs: curve key, then oid, then ts.
struct KeyedRecord {
    std::uint64_t key;
    ObjectRecord rec;
};

void sort_keyed(std::vector<KeyedRecord>& v) {
    std::sort(v.begin(), v.end(), [](const KeyedRecord& a, const KeyedRecord& b) {
        if (a.key != b.key) return a.key < b.key;
        if (a.rec.oid != b.rec.oid) return a.rec.oid < b.rec.oid;
        return a.rec.ts < b.rec.ts;
    });
}

std::vector<KeyedRecord> key_records(const std::vector<ObjectRecord>& records, CurveKind kind,
                                     const Rect& world) {
    std::vector<double> xs(records.size()), ys(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        xs[i] = records[i].loc.x;
        ys[i] = records[i].loc.y;
    }
    std::vector<std::uint64_t> keys(records.size());
    curve_keys(xs.data(), ys.data(), records.size(), kind, world, keys.data());
    std::vector<KeyedRecord> out(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) out[i] = {keys[i], records[i]};
    return out;
}

}  // namespace

LsmRumTree::LsmRumTree(EngineConfig cfg)
    : cfg_(std::move(cfg)),
      buffered_(cfg_.buffered_threshold),
      vacuum_(cfg_.vacuum_threshold, cfg_.vacuum_skip_recent) {
    cfg_.validate();
    if (cfg_.data_dir.empty()) {
        data_dir_ = make_private_dir();
        owns_data_dir_ = true;
    } else {
        data_dir_ = cfg_.data_dir;
        std::filesystem::create_directories(data_dir_);
    }
    mem_ = std::make_unique<Rtree>(cfg_.node_capacity);
    vacuum_.attach(*mem_);
}

LsmRumTree::~LsmRumTree() {
    if (owns_data_dir_) {
        std::error_code ec;
        std::filesystem::remove_all(data_dir_, ec);
    }
}

std::filesystem::path LsmRumTree::component_path(std::uint64_t id) const {
    return data_dir_ / ("component-" + std::to_string(id) + ".lrum");
}

void LsmRumTree::ensure_room_for_record() {
    if (mem_->empty()) return;
    if ((mem_->size() + 1) * kRecordByteEstimate > cfg_.memory_budget_bytes) flush_locked();
}

Timestamp LsmRumTree::ingest_insert(ObjectId oid, Location loc) {
    Timestamp ts = clock_.tick();
    std::unique_lock lock(mu_);
    ensure_room_for_record();
    mem_->insert(ObjectRecord{loc, oid, ts});
    return ts;
}

Timestamp LsmRumTree::ingest_delete(ObjectId oid) {
    Timestamp ts = clock_.tick();
    // Deletes never touch the tree and never trigger a flush.
    memo_.record_obsolete(oid, ts);
    return ts;
}

Timestamp LsmRumTree::ingest_update(ObjectId oid, Location new_loc) {
    Timestamp ts = clock_.tick();
    memo_.record_obsolete(oid, ts);
    std::unique_lock lock(mu_);
    ensure_room_for_record();
    RtreeNode* leaf = mem_->insert(ObjectRecord{new_loc, oid, ts});
    ++update_tick_;
    if (cfg_.cleaning.buffered)
        cleaned_buffered_ += buffered_.on_update(*mem_, leaf, memo_, update_tick_);
    if (cfg_.cleaning.vacuum) cleaned_vacuum_ += vacuum_.on_update(*mem_, memo_, update_tick_);
    return ts;
}

std::uint64_t LsmRumTree::flush_locked() {
    std::vector<KeyedRecord> keyed = key_records(mem_->all_records(), cfg_.curve, cfg_.world);
    sort_keyed(keyed);

    std::vector<ObjectRecord> survivors;
    survivors.reserve(keyed.size());
    storage::ComponentMeta meta;
    meta.curve = cfg_.curve;
    for (const KeyedRecord& kr : keyed) {
        if (cfg_.cleaning.flush) {
            auto e = memo_.lookup(kr.rec.oid);
            if (e && kr.rec.ts < e->first) {
                memo_.clean_one(kr.rec.oid);
                ++cleaned_flush_;
                continue;
            }
        }
        if (survivors.empty() || kr.rec.ts < meta.min_ts) meta.min_ts = kr.rec.ts;
        if (survivors.empty() || kr.rec.ts > meta.max_ts) meta.max_ts = kr.rec.ts;
        survivors.push_back(kr.rec);
    }
    meta.record_count = survivors.size();
    if (survivors.empty()) meta.min_ts = meta.max_ts = kNeverTs;

    const std::uint64_t id = next_component_id_++;
    auto comp = std::make_shared<DiskComponent>();
    comp->id = id;
    comp->path = component_path(id);
    comp->meta = meta;
    storage::write_component(comp->path, survivors, meta, cfg_.page_size_bytes);
    comp->data = storage::PackedRecords::from_sorted(survivors, cfg_.curve, cfg_.world);
    disk_.push_back(std::move(comp));

    mem_ = std::make_unique<Rtree>(cfg_.node_capacity);
    vacuum_.attach(*mem_);
    ++flush_count_;

    maybe_merge_locked();
    return id;
}

std::optional<std::uint64_t> LsmRumTree::force_flush() {
    std::unique_lock lock(mu_);
    if (mem_->empty()) return std::nullopt;
    return flush_locked();
}

std::optional<std::uint64_t> LsmRumTree::maybe_merge_locked() {
    std::vector<std::size_t> sizes;
    sizes.reserve(disk_.size());
    for (auto it = disk_.rbegin(); it != disk_.rend(); ++it) sizes.push_back((*it)->byte_size());
    std::size_t run = prefix_merge_run(sizes, cfg_.effective_max_mergeable(), cfg_.merge_threshold);
    if (run == 0) return std::nullopt;
    return merge_locked(run);
}

std::optional<std::uint64_t> LsmRumTree::maybe_merge() {
    std::unique_lock lock(mu_);
    return maybe_merge_locked();
}

std::optional<std::uint64_t> LsmRumTree::force_full_merge() {
    std::unique_lock lock(mu_);
    if (disk_.empty()) return std::nullopt;
    return merge_locked(disk_.size());
}

std::uint64_t LsmRumTree::merge_locked(std::size_t count_from_newest) {
    assert(count_from_newest >= 1 && count_from_newest <= disk_.size());
    const std::size_t first = disk_.size() - count_from_newest;

    std::vector<KeyedRecord> keyed;
    std::size_t total = 0;
    for (std::size_t c = first; c < disk_.size(); ++c) total += disk_[c]->record_count();
    keyed.reserve(total);
    for (std::size_t c = first; c < disk_.size(); ++c) {
        const storage::PackedRecords& p = disk_[c]->data;
        for (std::size_t i = 0; i < p.size(); ++i)
            keyed.push_back(KeyedRecord{p.keys[i], p.record_at(i)});
    }
    sort_keyed(keyed);

    std::vector<ObjectRecord> survivors;
    survivors.reserve(keyed.size());
    storage::ComponentMeta meta;
    meta.curve = cfg_.curve;
    for (const KeyedRecord& kr : keyed) {
        if (cfg_.cleaning.merge) {
            auto e = memo_.lookup(kr.rec.oid);
            if (e && kr.rec.ts < e->first) {
                memo_.clean_one(kr.rec.oid);
                ++cleaned_merge_;
                continue;
            }
        }
        if (survivors.empty() || kr.rec.ts < meta.min_ts) meta.min_ts = kr.rec.ts;
        if (survivors.empty() || kr.rec.ts > meta.max_ts) meta.max_ts = kr.rec.ts;
        survivors.push_back(kr.rec);
    }
    meta.record_count = survivors.size();
    if (survivors.empty()) meta.min_ts = meta.max_ts = kNeverTs;

    const std::uint64_t id = next_component_id_++;
    auto merged = std::make_shared<DiskComponent>();
    merged->id = id;
    merged->path = component_path(id);
    merged->meta = meta;
    // Write before retiring inputs: on failure the inputs stay visible.
    storage::write_component(merged->path, survivors, meta, cfg_.page_size_bytes);
    merged->data = storage::PackedRecords::from_sorted(survivors, cfg_.curve, cfg_.world);

    std::vector<std::filesystem::path> retired;
    for (std::size_t c = first; c < disk_.size(); ++c) retired.push_back(disk_[c]->path);
    disk_.erase(disk_.begin() + static_cast<std::ptrdiff_t>(first), disk_.end());
    disk_.push_back(std::move(merged));
    for (const auto& p : retired) {
        std::error_code ec;
        std::filesystem::remove(p, ec);
    }
    ++merge_count_;
    return id;
}

std::vector<ObjectRecord> LsmRumTree::range_query(const Rect& window) {
    std::shared_lock lock(mu_);
    std::vector<ObjectRecord> candidates;
    std::uint64_t scanned = 0;
    for (const auto& comp : disk_) {
        if (comp->record_count() == 0) continue;
        scanned += storage::prune_scan(comp->data, window, cfg_.curve, cfg_.world, candidates);
    }
    scanned += mem_->range_search(window, candidates);
    query_scanned_.fetch_add(scanned, std::memory_order_relaxed);
    return memo_.validate(candidates);
}

std::size_t LsmRumTree::clean_memory_now() {
    std::unique_lock lock(mu_);
    std::size_t removed = 0;
    RtreeNode* leaf = mem_->first_leaf();
    while (leaf) {
        RtreeNode* next = leaf->next_leaf;
        removed += mem_->clean_node(leaf, memo_, update_tick_);
        leaf = next;
    }
    cleaned_forced_ += removed;
    return removed;
}

EngineStats LsmRumTree::stats() const {
    std::shared_lock lock(mu_);
    EngineStats s;
    s.flush_count = flush_count_;
    s.merge_count = merge_count_;
    s.um_size_now = memo_.size();
    s.um_size_max = memo_.max_size();
    s.component_count = disk_.size();
    for (const auto& c : disk_) s.component_record_counts.push_back(c->record_count());
    s.memory_records = mem_->size();
    s.cleaned_buffered = cleaned_buffered_;
    s.cleaned_vacuum = cleaned_vacuum_;
    s.cleaned_flush = cleaned_flush_;
    s.cleaned_merge = cleaned_merge_;
    s.cleaned_forced = cleaned_forced_;
    s.query_records_scanned = query_scanned_.load(std::memory_order_relaxed);
    s.validation_anomalies = memo_.validation_anomalies();
    return s;
}

std::vector<std::shared_ptr<const DiskComponent>> LsmRumTree::components() const {
    std::shared_lock lock(mu_);
    return {disk_.begin(), disk_.end()};
}

}  // namespace lsmrum
