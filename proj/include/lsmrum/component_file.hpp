#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "lsmrum/curve.hpp"
#include "lsmrum/types.hpp"

namespace lsmrum::storage {

// On-disk component layout (little-endian, bit-exact):
//   magic "LRUM" (4) | version u16 | record_count u64 | min_ts u64 |
//   max_ts u64 | curve id u8 | 13 reserved zero bytes          = 44-byte header
//   record_count x { oid u64 | ts u64 | x f64 | y f64 }        = 32 B/record
//   crc32 of all preceding bytes, u32
// Records are sorted ascending by curve key. No page/tree directory is
// stored; queries prune by curve-key ranges and scan.
inline constexpr char kMagic[4] = {'L', 'R', 'U', 'M'};
inline constexpr std::uint16_t kFormatVersion = 1;
inline constexpr std::size_t kHeaderBytes = 44;
inline constexpr std::size_t kRecordBytes = 32;

struct ComponentMeta {
    std::uint64_t record_count = 0;
    Timestamp min_ts = kNeverTs;
    Timestamp max_ts = kNeverTs;
    CurveKind curve = CurveKind::Hilbert;
};

// Serializes sorted records to a temp file and atomically renames it into
// place, so readers never observe a partial component. io_chunk controls the
// write granularity (the configured page size).
void write_component(const std::filesystem::path& path, const std::vector<ObjectRecord>& records,
                     const ComponentMeta& meta, std::size_t io_chunk = 2048);

struct ComponentData {
    ComponentMeta meta;
    std::vector<ObjectRecord> records;
};

// Loads and fully verifies a component: magic, version, length arithmetic,
// CRC. Throws StorageError on corruption or truncation.
ComponentData read_component(const std::filesystem::path& path);

// Exact serialized image of a component; what write_component persists.
std::vector<std::uint8_t> encode_component(const std::vector<ObjectRecord>& records,
                                           const ComponentMeta& meta);

// Column layout of a component's records, sorted by curve key; disk
// components are scanned through this in memory.
struct PackedRecords {
    std::vector<std::uint64_t> keys;
    std::vector<double> xs, ys;
    std::vector<std::uint64_t> oids;
    std::vector<Timestamp> tss;

    std::size_t size() const { return keys.size(); }

    ObjectRecord record_at(std::size_t i) const {
        return ObjectRecord{{xs[i], ys[i]}, oids[i], tss[i]};
    }

    static PackedRecords from_sorted(const std::vector<ObjectRecord>& records, CurveKind kind,
                                     const Rect& world);
};

// Appends the records inside `window` to `out`, in key order, touching only
// the key ranges the window decomposes to. Returns the number of records
// scanned (matches plus pruning overshoot).
std::size_t prune_scan(const PackedRecords& comp, const Rect& window, CurveKind kind,
                       const Rect& world, std::vector<ObjectRecord>& out);

}  // namespace lsmrum::storage
