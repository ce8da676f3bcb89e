#include "lsmrum/eager_index.hpp"

#include <unistd.h>
#include <zlib.h>

#include <algorithm>
#include <atomic>
#include <fstream>
#include <mutex>

#include "lsmrum/merge_policy.hpp"

namespace lsmrum {

namespace {

std::filesystem::path private_dir() {
    static std::atomic<std::uint64_t> seq{0};
    auto dir = std::filesystem::temp_directory_path() /
               ("lsmrum-eager-" + std::to_string(::getpid()) + "-" + std::to_string(seq.fetch_add(1)));
    std::filesystem::create_directories(dir);
    return dir;
}

// Flat sorted key file: "LRDK" | count u64 | keys u64... | crc32.
void write_deleted_keys(const std::filesystem::path& path, const std::vector<ObjectId>& keys) {
    std::vector<std::uint8_t> buf;
    buf.reserve(16 + keys.size() * 8);
    const char magic[4] = {'L', 'R', 'D', 'K'};
    buf.insert(buf.end(), magic, magic + 4);
    auto put_u64 = [&buf](std::uint64_t v) {
        for (int i = 0; i < 8; ++i) buf.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    };
    put_u64(keys.size());
    for (ObjectId k : keys) put_u64(k);
    std::uint32_t crc = static_cast<std::uint32_t>(::crc32(0L, buf.data(), static_cast<uInt>(buf.size())));
    for (int i = 0; i < 4; ++i) buf.push_back(static_cast<std::uint8_t>(crc >> (8 * i)));

    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw StorageError("cannot open for write: " + tmp.string());
        out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
        if (!out) throw StorageError("write failed: " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

std::vector<ObjectRecord> curve_sorted(std::vector<ObjectRecord> records, CurveKind kind,
                                       const Rect& world) {
    std::vector<double> xs(records.size()), ys(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        xs[i] = records[i].loc.x;
        ys[i] = records[i].loc.y;
    }
    std::vector<std::uint64_t> keys(records.size());
    curve_keys(xs.data(), ys.data(), records.size(), kind, world, keys.data());
    std::vector<std::size_t> order(records.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (keys[a] != keys[b]) return keys[a] < keys[b];
        if (records[a].oid != records[b].oid) return records[a].oid < records[b].oid;
        return records[a].ts < records[b].ts;
    });
    std::vector<ObjectRecord> out;
    out.reserve(records.size());
    for (std::size_t i : order) out.push_back(records[i]);
    return out;
}

storage::ComponentMeta meta_for(const std::vector<ObjectRecord>& records, CurveKind kind) {
    storage::ComponentMeta m;
    m.curve = kind;
    m.record_count = records.size();
    for (const auto& r : records) {
        if (m.min_ts == kNeverTs || r.ts < m.min_ts) m.min_ts = r.ts;
        if (r.ts > m.max_ts) m.max_ts = r.ts;
    }
    return m;
}

}  // namespace

EagerIndex::EagerIndex(EngineConfig cfg) : cfg_(std::move(cfg)) {
    cfg_.validate();
    if (cfg_.data_dir.empty()) {
        data_dir_ = private_dir();
        owns_data_dir_ = true;
    } else {
        data_dir_ = cfg_.data_dir;
        std::filesystem::create_directories(data_dir_);
    }
    mem_ = std::make_unique<Rtree>(cfg_.node_capacity);
}

EagerIndex::~EagerIndex() {
    if (owns_data_dir_) {
        std::error_code ec;
        std::filesystem::remove_all(data_dir_, ec);
    }
}

void EagerIndex::ensure_room_for_record() {
    if (mem_->empty()) return;
    if ((mem_->size() + 1) * kRecordByteEstimate > cfg_.memory_budget_bytes) flush_locked();
}

Timestamp EagerIndex::insert(ObjectId oid, Location loc) {
    Timestamp ts = clock_.tick();
    std::unique_lock lock(mu_);
    ensure_room_for_record();
    mem_->insert(ObjectRecord{loc, oid, ts});
    return ts;
}

Timestamp EagerIndex::remove(ObjectId oid, Location old_loc) {
    Timestamp ts = clock_.tick();
    std::unique_lock lock(mu_);
    mem_->remove_exact(old_loc, oid);
    mem_deleted_.insert(oid);
    return ts;
}

Timestamp EagerIndex::update(ObjectId oid, Location old_loc, Location new_loc) {
    Timestamp ts = clock_.tick();
    std::unique_lock lock(mu_);
    mem_->remove_exact(old_loc, oid);
    mem_deleted_.insert(oid);
    ensure_room_for_record();
    mem_->insert(ObjectRecord{new_loc, oid, ts});
    return ts;
}

std::uint64_t EagerIndex::flush_locked() {
    std::vector<ObjectRecord> sorted = curve_sorted(mem_->all_records(), cfg_.curve, cfg_.world);

    auto comp = std::make_shared<Component>();
    comp->id = next_component_id_++;
    comp->records_path = data_dir_ / ("eager-" + std::to_string(comp->id) + ".lrum");
    comp->deleted_path = data_dir_ / ("eager-" + std::to_string(comp->id) + ".keys");
    comp->deleted_keys.assign(mem_deleted_.begin(), mem_deleted_.end());

    storage::write_component(comp->records_path, sorted, meta_for(sorted, cfg_.curve),
                             cfg_.page_size_bytes);
    write_deleted_keys(comp->deleted_path, comp->deleted_keys);
    comp->data = storage::PackedRecords::from_sorted(sorted, cfg_.curve, cfg_.world);
    disk_.push_back(std::move(comp));

    mem_ = std::make_unique<Rtree>(cfg_.node_capacity);
    mem_deleted_.clear();
    ++flush_count_;
    maybe_merge_locked();
    return disk_.back()->id;
}

std::optional<std::uint64_t> EagerIndex::force_flush() {
    std::unique_lock lock(mu_);
    if (mem_->empty() && mem_deleted_.empty()) return std::nullopt;
    return flush_locked();
}

void EagerIndex::maybe_merge_locked() {
    std::vector<std::size_t> sizes;
    sizes.reserve(disk_.size());
    for (auto it = disk_.rbegin(); it != disk_.rend(); ++it)
        sizes.push_back((*it)->data.size() * storage::kRecordBytes + storage::kHeaderBytes);
    std::size_t run = prefix_merge_run(sizes, cfg_.effective_max_mergeable(), cfg_.merge_threshold);
    if (run == 0) return;

    const std::size_t first = disk_.size() - run;

    // A record survives unless a strictly newer input's deleted-key set
    // names its key; the merged set is the union (it still invalidates
    // records in components older than the merge).
    std::vector<ObjectRecord> keep;
    std::vector<ObjectId> merged_keys;
    for (std::size_t c = first; c < disk_.size(); ++c) {
        const auto& comp = disk_[c];
        for (std::size_t i = 0; i < comp->data.size(); ++i) {
            ObjectRecord r = comp->data.record_at(i);
            bool dead = false;
            for (std::size_t newer = c + 1; newer < disk_.size() && !dead; ++newer)
                dead = std::binary_search(disk_[newer]->deleted_keys.begin(),
                                          disk_[newer]->deleted_keys.end(), r.oid);
            if (!dead) keep.push_back(r);
        }
        merged_keys.insert(merged_keys.end(), comp->deleted_keys.begin(), comp->deleted_keys.end());
    }
    std::sort(merged_keys.begin(), merged_keys.end());
    merged_keys.erase(std::unique(merged_keys.begin(), merged_keys.end()), merged_keys.end());

    std::vector<ObjectRecord> sorted = curve_sorted(std::move(keep), cfg_.curve, cfg_.world);
    auto merged = std::make_shared<Component>();
    merged->id = next_component_id_++;
    merged->records_path = data_dir_ / ("eager-" + std::to_string(merged->id) + ".lrum");
    merged->deleted_path = data_dir_ / ("eager-" + std::to_string(merged->id) + ".keys");
    merged->deleted_keys = std::move(merged_keys);
    storage::write_component(merged->records_path, sorted, meta_for(sorted, cfg_.curve),
                             cfg_.page_size_bytes);
    write_deleted_keys(merged->deleted_path, merged->deleted_keys);
    merged->data = storage::PackedRecords::from_sorted(sorted, cfg_.curve, cfg_.world);

    std::vector<std::filesystem::path> retired;
    for (std::size_t c = first; c < disk_.size(); ++c) {
        retired.push_back(disk_[c]->records_path);
        retired.push_back(disk_[c]->deleted_path);
    }
    disk_.erase(disk_.begin() + static_cast<std::ptrdiff_t>(first), disk_.end());
    disk_.push_back(std::move(merged));
    for (const auto& p : retired) {
        std::error_code ec;
        std::filesystem::remove(p, ec);
    }
    ++merge_count_;
}

bool EagerIndex::key_deleted_after(ObjectId oid, std::size_t level) const {
    for (std::size_t c = level + 1; c < disk_.size(); ++c)
        if (std::binary_search(disk_[c]->deleted_keys.begin(), disk_[c]->deleted_keys.end(), oid))
            return true;
    return mem_deleted_.count(oid) > 0;
}

std::vector<ObjectRecord> EagerIndex::query(const Rect& window) {
    std::shared_lock lock(mu_);
    std::vector<ObjectRecord> results;
    for (std::size_t c = 0; c < disk_.size(); ++c) {
        std::vector<ObjectRecord> cands;
        storage::prune_scan(disk_[c]->data, window, cfg_.curve, cfg_.world, cands);
        for (const ObjectRecord& r : cands)
            if (!key_deleted_after(r.oid, c)) results.push_back(r);
    }
    // Memory candidates have no newer component to invalidate them.
    mem_->range_search(window, results);
    return results;
}

EngineStats EagerIndex::stats() const {
    std::shared_lock lock(mu_);
    EngineStats s;
    s.flush_count = flush_count_;
    s.merge_count = merge_count_;
    s.component_count = disk_.size();
    for (const auto& c : disk_) s.component_record_counts.push_back(c->data.size());
    s.memory_records = mem_->size();
    return s;
}

}  // namespace lsmrum
