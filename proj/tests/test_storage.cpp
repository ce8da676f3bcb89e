#include <doctest.h>

#include <zlib.h>

#include <bit>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>

#include "lsmrum/component_file.hpp"

using namespace lsmrum;
using namespace lsmrum::storage;

namespace {

namespace fs = std::filesystem;

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("lsmrum-test-" + std::to_string(::getpid()) + "-" +
                                            std::to_string(reinterpret_cast<std::uintptr_t>(this)));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
};

std::vector<std::uint8_t> slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void spit(const fs::path& p, const std::vector<std::uint8_t>& bytes) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
}

std::vector<ObjectRecord> sorted_random_records(std::mt19937_64& rng, std::size_t n,
                                                const Rect& world, CurveKind kind) {
    std::uniform_real_distribution<double> ux(world.min.x, world.max.x);
    std::uniform_real_distribution<double> uy(world.min.y, world.max.y);
    std::vector<ObjectRecord> recs;
    recs.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
        recs.push_back({{ux(rng), uy(rng)}, rng() % 1000, static_cast<Timestamp>(i + 1)});
    std::sort(recs.begin(), recs.end(), [&](const ObjectRecord& a, const ObjectRecord& b) {
        return curve_key(a.loc, kind, world) < curve_key(b.loc, kind, world);
    });
    return recs;
}

const Rect kWorld{{-180.0, -90.0}, {180.0, 90.0}};

}  // namespace

TEST_SUITE_BEGIN("storage");

TEST_CASE("three records round-trip exactly") {
    TempDir dir;
    std::vector<ObjectRecord> recs{
        {{10.0, 10.0}, 1, 1},
        {{20.0, 20.0}, 2, 2},
        {{-5.25, 42.75}, 300, 77},
    };
    ComponentMeta meta{3, 1, 77, CurveKind::Hilbert};
    auto path = dir.path / "c.lrum";
    write_component(path, recs, meta);

    ComponentData back = read_component(path);
    CHECK(back.meta.record_count == 3);
    CHECK(back.meta.min_ts == 1);
    CHECK(back.meta.max_ts == 77);
    CHECK(back.meta.curve == CurveKind::Hilbert);
    CHECK(back.records == recs);
}

TEST_CASE("large random batch round-trips exactly") {
    TempDir dir;
    std::mt19937_64 rng(21);
    auto recs = sorted_random_records(rng, 100000, kWorld, CurveKind::ZOrder);
    ComponentMeta meta{recs.size(), 1, recs.size(), CurveKind::ZOrder};
    auto path = dir.path / "big.lrum";
    write_component(path, recs, meta);
    CHECK(read_component(path).records == recs);
}

TEST_CASE("empty component round-trips") {
    TempDir dir;
    ComponentMeta meta{0, kNeverTs, kNeverTs, CurveKind::Hilbert};
    auto path = dir.path / "empty.lrum";
    write_component(path, {}, meta);
    ComponentData back = read_component(path);
    CHECK(back.records.empty());
    CHECK(back.meta.record_count == 0);
}

TEST_CASE("a truncated file is a format error") {
    TempDir dir;
    std::vector<ObjectRecord> recs{{{1.0, 2.0}, 1, 1}, {{3.0, 4.0}, 2, 2}};
    auto path = dir.path / "t.lrum";
    write_component(path, recs, ComponentMeta{2, 1, 2, CurveKind::Hilbert});

    auto bytes = slurp(path);
    for (std::size_t cut : {bytes.size() - 1, bytes.size() - 5, kHeaderBytes + 3, std::size_t{7}}) {
        auto shorter = bytes;
        shorter.resize(cut);
        spit(path, shorter);
        CHECK_THROWS_AS(read_component(path), StorageError);
    }
}

TEST_CASE("every single-byte corruption is detected") {
    TempDir dir;
    std::mt19937_64 rng(22);
    auto recs = sorted_random_records(rng, 64, kWorld, CurveKind::Hilbert);
    auto path = dir.path / "fuzz.lrum";
    write_component(path, recs, ComponentMeta{recs.size(), 1, recs.size(), CurveKind::Hilbert});
    const auto pristine = slurp(path);

    for (int rep = 0; rep < 200; ++rep) {
        auto corrupted = pristine;
        std::size_t pos = rng() % corrupted.size();
        std::uint8_t delta = static_cast<std::uint8_t>(1 + rng() % 255);
        corrupted[pos] ^= delta;
        spit(path, corrupted);
        CHECK_THROWS_AS(read_component(path), StorageError);
    }
    spit(path, pristine);
    CHECK(read_component(path).records == recs);
}

TEST_CASE("golden bytes of a fixed three-record component") {
    // Assembled independently of the production encoder, byte by byte.
    std::vector<ObjectRecord> recs{
        {{10.0, 10.0}, 1, 1},
        {{20.0, 20.0}, 2, 2},
        {{30.0, 30.0}, 3, 4},
    };
    ComponentMeta meta{3, 1, 4, CurveKind::Hilbert};

    std::vector<std::uint8_t> expect;
    auto le16 = [&](std::uint16_t v) {
        expect.push_back(v & 0xFF);
        expect.push_back((v >> 8) & 0xFF);
    };
    auto le64 = [&](std::uint64_t v) {
        for (int i = 0; i < 8; ++i) expect.push_back((v >> (8 * i)) & 0xFF);
    };
    expect.push_back('L');
    expect.push_back('R');
    expect.push_back('U');
    expect.push_back('M');
    le16(1);      // version
    le64(3);      // record count
    le64(1);      // min ts
    le64(4);      // max ts
    expect.push_back(0x01);  // hilbert curve id
    for (int i = 0; i < 13; ++i) expect.push_back(0);
    REQUIRE(expect.size() == 44);
    for (const auto& r : recs) {
        le64(r.oid);
        le64(r.ts);
        le64(std::bit_cast<std::uint64_t>(r.loc.x));
        le64(std::bit_cast<std::uint64_t>(r.loc.y));
    }
    std::uint32_t crc =
        static_cast<std::uint32_t>(::crc32(0L, expect.data(), static_cast<uInt>(expect.size())));
    for (int i = 0; i < 4; ++i) expect.push_back((crc >> (8 * i)) & 0xFF);

    CHECK(encode_component(recs, meta) == expect);

    // Two writes produce identical bytes.
    TempDir dir;
    write_component(dir.path / "a.lrum", recs, meta);
    write_component(dir.path / "b.lrum", recs, meta);
    CHECK(slurp(dir.path / "a.lrum") == expect);
    CHECK(slurp(dir.path / "b.lrum") == slurp(dir.path / "a.lrum"));
}

TEST_CASE("prune_scan equals the full-scan filter and never scans more") {
    std::mt19937_64 rng(23);
    for (CurveKind kind : {CurveKind::Hilbert, CurveKind::ZOrder}) {
        auto recs = sorted_random_records(rng, 10000, kWorld, kind);
        PackedRecords packed = PackedRecords::from_sorted(recs, kind, kWorld);

        std::uniform_real_distribution<double> ux(-180.0, 180.0), uy(-90.0, 90.0);
        for (int q = 0; q < 100; ++q) {
            double x1 = ux(rng), x2 = ux(rng), y1 = uy(rng), y2 = uy(rng);
            Rect w{{std::min(x1, x2), std::min(y1, y2)}, {std::max(x1, x2), std::max(y1, y2)}};

            std::vector<ObjectRecord> got;
            std::size_t scanned = prune_scan(packed, w, kind, kWorld, got);

            std::multiset<std::tuple<double, double, ObjectId, Timestamp>> expect, actual;
            for (const auto& r : recs)
                if (w.contains(r.loc)) expect.insert({r.loc.x, r.loc.y, r.oid, r.ts});
            for (const auto& r : got) actual.insert({r.loc.x, r.loc.y, r.oid, r.ts});

            CHECK(actual == expect);
            CHECK(scanned <= recs.size());
            CHECK(scanned >= got.size());
        }
    }
}

TEST_SUITE_END();
