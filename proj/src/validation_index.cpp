#include "lsmrum/validation_index.hpp"

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
               ("lsmrum-val-" + std::to_string(::getpid()) + "-" + std::to_string(seq.fetch_add(1)));
    std::filesystem::create_directories(dir);
    return dir;
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

ValidationIndex::ValidationIndex(EngineConfig cfg) : cfg_(std::move(cfg)) {
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

ValidationIndex::~ValidationIndex() {
    if (owns_data_dir_) {
        std::error_code ec;
        std::filesystem::remove_all(data_dir_, ec);
    }
}

void ValidationIndex::ensure_room_for_record() {
    if (mem_->empty()) return;
    if ((mem_->size() + 1) * kRecordByteEstimate > cfg_.memory_budget_bytes) flush_locked();
}

Timestamp ValidationIndex::insert(ObjectId oid, Location loc) {
    Timestamp ts = clock_.tick();
    std::unique_lock lock(mu_);
    ensure_room_for_record();
    mem_->insert(ObjectRecord{loc, oid, ts});
    pk_[oid] = PkEntry{ts, false};
    return ts;
}

Timestamp ValidationIndex::remove(ObjectId oid) {
    Timestamp ts = clock_.tick();
    std::unique_lock lock(mu_);
    pk_[oid] = PkEntry{ts, true};  // control entry only; the tree is untouched
    return ts;
}

// Primary-key snapshot written beside each flushed component:
// "LRPK" | count u64 | { oid u64 | ts u64 | deleted u8 } ... | crc32.
void ValidationIndex::snapshot_pk_locked(std::uint64_t component_id) {
    std::vector<std::uint8_t> buf;
    const char magic[4] = {'L', 'R', 'P', 'K'};
    buf.insert(buf.end(), magic, magic + 4);
    auto put_u64 = [&buf](std::uint64_t v) {
        for (int i = 0; i < 8; ++i) buf.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    };
    put_u64(pk_.size());
    for (const auto& [oid, e] : pk_) {
        put_u64(oid);
        put_u64(e.ts);
        buf.push_back(e.deleted ? 1 : 0);
    }
    std::uint32_t crc = static_cast<std::uint32_t>(::crc32(0L, buf.data(), static_cast<uInt>(buf.size())));
    for (int i = 0; i < 4; ++i) buf.push_back(static_cast<std::uint8_t>(crc >> (8 * i)));

    auto path = data_dir_ / ("val-" + std::to_string(component_id) + ".pk");
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

std::uint64_t ValidationIndex::flush_locked() {
    std::vector<ObjectRecord> sorted = curve_sorted(mem_->all_records(), cfg_.curve, cfg_.world);
    auto comp = std::make_shared<Component>();
    comp->id = next_component_id_++;
    comp->records_path = data_dir_ / ("val-" + std::to_string(comp->id) + ".lrum");
    storage::write_component(comp->records_path, sorted, meta_for(sorted, cfg_.curve),
                             cfg_.page_size_bytes);
    comp->data = storage::PackedRecords::from_sorted(sorted, cfg_.curve, cfg_.world);
    snapshot_pk_locked(comp->id);
    disk_.push_back(std::move(comp));

    mem_ = std::make_unique<Rtree>(cfg_.node_capacity);
    ++flush_count_;
    maybe_merge_locked();
    return disk_.back()->id;
}

std::optional<std::uint64_t> ValidationIndex::force_flush() {
    std::unique_lock lock(mu_);
    if (mem_->empty()) return std::nullopt;
    return flush_locked();
}

void ValidationIndex::maybe_merge_locked() {
    std::vector<std::size_t> sizes;
    sizes.reserve(disk_.size());
    for (auto it = disk_.rbegin(); it != disk_.rend(); ++it)
        sizes.push_back((*it)->data.size() * storage::kRecordBytes + storage::kHeaderBytes);
    std::size_t run = prefix_merge_run(sizes, cfg_.effective_max_mergeable(), cfg_.merge_threshold);
    if (run == 0) return;

    const std::size_t first = disk_.size() - run;
    std::vector<ObjectRecord> all;
    for (std::size_t c = first; c < disk_.size(); ++c)
        for (std::size_t i = 0; i < disk_[c]->data.size(); ++i)
            all.push_back(disk_[c]->data.record_at(i));

    std::vector<ObjectRecord> sorted = curve_sorted(std::move(all), cfg_.curve, cfg_.world);
    auto merged = std::make_shared<Component>();
    merged->id = next_component_id_++;
    merged->records_path = data_dir_ / ("val-" + std::to_string(merged->id) + ".lrum");
    storage::write_component(merged->records_path, sorted, meta_for(sorted, cfg_.curve),
                             cfg_.page_size_bytes);
    merged->data = storage::PackedRecords::from_sorted(sorted, cfg_.curve, cfg_.world);

    std::vector<std::filesystem::path> retired;
    for (std::size_t c = first; c < disk_.size(); ++c) retired.push_back(disk_[c]->records_path);
    disk_.erase(disk_.begin() + static_cast<std::ptrdiff_t>(first), disk_.end());
    disk_.push_back(std::move(merged));
    for (const auto& p : retired) {
        std::error_code ec;
        std::filesystem::remove(p, ec);
    }
    ++merge_count_;
}

std::vector<ObjectRecord> ValidationIndex::query(const Rect& window) {
    std::shared_lock lock(mu_);
    std::vector<ObjectRecord> candidates;
    for (const auto& comp : disk_)
        storage::prune_scan(comp->data, window, cfg_.curve, cfg_.world, candidates);
    mem_->range_search(window, candidates);

    std::vector<ObjectRecord> results;
    results.reserve(candidates.size());
    for (const ObjectRecord& cand : candidates) {
        auto it = pk_.find(cand.oid);
        if (it != pk_.end() && !it->second.deleted && it->second.ts == cand.ts)
            results.push_back(cand);
    }
    return results;
}

std::optional<std::pair<Timestamp, bool>> ValidationIndex::pk_lookup(ObjectId oid) const {
    std::shared_lock lock(mu_);
    auto it = pk_.find(oid);
    if (it == pk_.end()) return std::nullopt;
    return std::make_pair(it->second.ts, it->second.deleted);
}

EngineStats ValidationIndex::stats() const {
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
