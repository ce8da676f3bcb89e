#include "lsmrum/component_file.hpp"

#include <zlib.h>

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <numeric>

#include "lsmrum/kernels.hpp"

namespace lsmrum::storage {

namespace {

void put_u16(std::vector<std::uint8_t>& b, std::uint16_t v) {
    b.push_back(static_cast<std::uint8_t>(v));
    b.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& b, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) b.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u64(std::vector<std::uint8_t>& b, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) b.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_f64(std::vector<std::uint8_t>& b, double v) { put_u64(b, std::bit_cast<std::uint64_t>(v)); }

std::uint16_t get_u16(const std::uint8_t* p) {
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t get_u32(const std::uint8_t* p) {
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | p[i];
    return v;
}

std::uint64_t get_u64(const std::uint8_t* p) {
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
    return v;
}

double get_f64(const std::uint8_t* p) { return std::bit_cast<double>(get_u64(p)); }

std::uint32_t crc_of(const std::uint8_t* data, std::size_t n) {
    return static_cast<std::uint32_t>(::crc32(0L, data, static_cast<uInt>(n)));
}

}  // namespace

std::vector<std::uint8_t> encode_component(const std::vector<ObjectRecord>& records,
                                           const ComponentMeta& meta) {
    std::vector<std::uint8_t> buf;
    buf.reserve(kHeaderBytes + records.size() * kRecordBytes + 4);

    buf.insert(buf.end(), kMagic, kMagic + 4);
    put_u16(buf, kFormatVersion);
    put_u64(buf, records.size());
    put_u64(buf, meta.min_ts);
    put_u64(buf, meta.max_ts);
    buf.push_back(static_cast<std::uint8_t>(meta.curve));
    buf.insert(buf.end(), 13, 0);

    for (const ObjectRecord& r : records) {
        put_u64(buf, r.oid);
        put_u64(buf, r.ts);
        put_f64(buf, r.loc.x);
        put_f64(buf, r.loc.y);
    }
    put_u32(buf, crc_of(buf.data(), buf.size()));
    return buf;
}

void write_component(const std::filesystem::path& path, const std::vector<ObjectRecord>& records,
                     const ComponentMeta& meta, std::size_t io_chunk) {
    std::vector<std::uint8_t> buf = encode_component(records, meta);

    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw StorageError("cannot open for write: " + tmp.string());
        std::size_t chunk = std::max<std::size_t>(io_chunk, 256);
        for (std::size_t off = 0; off < buf.size(); off += chunk) {
            std::size_t n = std::min(chunk, buf.size() - off);
            out.write(reinterpret_cast<const char*>(buf.data() + off), static_cast<std::streamsize>(n));
        }
        if (!out) throw StorageError("write failed: " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw StorageError("rename failed: " + path.string());
    }
}

ComponentData read_component(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary | std::ios::ate);
    if (!in) throw StorageError("cannot open: " + path.string());
    const auto len = static_cast<std::size_t>(in.tellg());
    if (len < kHeaderBytes + 4) throw StorageError("component too short: " + path.string());
    std::vector<std::uint8_t> buf(len);
    in.seekg(0);
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(len));
    if (!in) throw StorageError("read failed: " + path.string());

    if (std::memcmp(buf.data(), kMagic, 4) != 0)
        throw StorageError("bad magic: " + path.string());
    if (get_u16(buf.data() + 4) != kFormatVersion)
        throw StorageError("unsupported version: " + path.string());

    const std::uint32_t stored_crc = get_u32(buf.data() + len - 4);
    if (crc_of(buf.data(), len - 4) != stored_crc)
        throw StorageError("checksum mismatch: " + path.string());

    ComponentData out;
    out.meta.record_count = get_u64(buf.data() + 6);
    out.meta.min_ts = get_u64(buf.data() + 14);
    out.meta.max_ts = get_u64(buf.data() + 22);
    out.meta.curve = static_cast<CurveKind>(buf[30]);

    if (len != kHeaderBytes + out.meta.record_count * kRecordBytes + 4)
        throw StorageError("length mismatch: " + path.string());

    out.records.reserve(out.meta.record_count);
    const std::uint8_t* p = buf.data() + kHeaderBytes;
    for (std::uint64_t i = 0; i < out.meta.record_count; ++i, p += kRecordBytes) {
        ObjectRecord r;
        r.oid = get_u64(p);
        r.ts = get_u64(p + 8);
        r.loc.x = get_f64(p + 16);
        r.loc.y = get_f64(p + 24);
        out.records.push_back(r);
    }
    return out;
}

PackedRecords PackedRecords::from_sorted(const std::vector<ObjectRecord>& records, CurveKind kind,
                                         const Rect& world) {
    PackedRecords p;
    const std::size_t n = records.size();
    p.xs.resize(n);
    p.ys.resize(n);
    p.oids.resize(n);
    p.tss.resize(n);
    p.keys.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        p.xs[i] = records[i].loc.x;
        p.ys[i] = records[i].loc.y;
        p.oids[i] = records[i].oid;
        p.tss[i] = records[i].ts;
    }
    curve_keys(p.xs.data(), p.ys.data(), n, kind, world, p.keys.data());
    return p;
}

std::size_t prune_scan(const PackedRecords& comp, const Rect& window, CurveKind kind,
                       const Rect& world, std::vector<ObjectRecord>& out) {
    if (comp.size() == 0) return 0;
    std::size_t scanned = 0;
    std::vector<std::uint32_t> idx;
    for (const KeyRange& r : decompose_window(window, kind, world)) {
        auto lo = std::lower_bound(comp.keys.begin(), comp.keys.end(), r.lo);
        auto hi = std::upper_bound(lo, comp.keys.end(), r.hi);
        if (lo == hi) continue;
        const std::size_t begin = static_cast<std::size_t>(lo - comp.keys.begin());
        const std::size_t n = static_cast<std::size_t>(hi - lo);
        scanned += n;
        idx.clear();
        kernels::active_kernels().filter_in_rect(comp.xs.data() + begin, comp.ys.data() + begin, n,
                                                 window, static_cast<std::uint32_t>(begin), idx);
        for (std::uint32_t i : idx) out.push_back(comp.record_at(i));
    }
    return scanned;
}

}  // namespace lsmrum::storage
