#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>
#include <vector>

#include "lsmrum/curve.hpp"

using namespace lsmrum;

namespace {

// Independent reference: interleave bit by bit.
std::uint64_t zorder_naive(std::uint32_t qx, std::uint32_t qy) {
    std::uint64_t key = 0;
    for (int j = 0; j < 16; ++j) {
        key |= static_cast<std::uint64_t>((qx >> j) & 1u) << (2 * j);
        key |= static_cast<std::uint64_t>((qy >> j) & 1u) << (2 * j + 1);
    }
    return key;
}

// Independent inverse of the order-16 curve (standard d2xy formulation).
void hilbert_d2xy(std::uint64_t d, std::uint32_t& x, std::uint32_t& y) {
    x = y = 0;
    std::uint64_t t = d;
    for (std::uint32_t s = 1; s < (1u << kCurveOrder); s <<= 1) {
        std::uint32_t rx = static_cast<std::uint32_t>((t / 2) & 1);
        std::uint32_t ry = static_cast<std::uint32_t>((t ^ rx) & 1);
        if (ry == 0) {
            if (rx == 1) {
                x = s - 1 - x;
                y = s - 1 - y;
            }
            std::swap(x, y);
        }
        x += s * rx;
        y += s * ry;
        t /= 4;
    }
}

const Rect kWorld{{-180.0, -90.0}, {180.0, 90.0}};

}  // namespace

TEST_SUITE_BEGIN("curve");

TEST_CASE("world box min corner maps to z-order key 0") {
    CHECK(curve_key({-180.0, -90.0}, CurveKind::ZOrder, kWorld) == 0);
}

TEST_CASE("points in the same quantized cell share a key") {
    Location a{10.0, 20.0};
    Location b{10.0 + 1e-9, 20.0 + 1e-9};
    CHECK(curve_key(a, CurveKind::ZOrder, kWorld) == curve_key(b, CurveKind::ZOrder, kWorld));
    CHECK(curve_key(a, CurveKind::Hilbert, kWorld) == curve_key(b, CurveKind::Hilbert, kWorld));
}

TEST_CASE("out-of-box points clamp to the boundary cell") {
    CHECK(curve_key({-999.0, -999.0}, CurveKind::ZOrder, kWorld) ==
          curve_key({-180.0, -90.0}, CurveKind::ZOrder, kWorld));
    CHECK(curve_key({999.0, 999.0}, CurveKind::ZOrder, kWorld) ==
          curve_key({180.0, 90.0}, CurveKind::ZOrder, kWorld));
}

TEST_CASE("z-order keys match the naive interleave reference") {
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<std::uint32_t> q(0, 65535);
    for (int i = 0; i < 1000; ++i) {
        std::uint32_t qx = q(rng), qy = q(rng);
        CHECK(zorder_key(qx, qy) == zorder_naive(qx, qy));
    }
}

TEST_CASE("hilbert keys round-trip through the independent inverse") {
    std::mt19937_64 rng(12);
    std::uniform_int_distribution<std::uint64_t> d(0, (1ull << 32) - 1);
    for (int i = 0; i < 2000; ++i) {
        std::uint64_t key = d(rng);
        std::uint32_t x, y;
        hilbert_d2xy(key, x, y);
        CHECK(hilbert_key(x, y) == key);
    }
}

TEST_CASE("consecutive hilbert keys are Manhattan-adjacent cells") {
    std::mt19937_64 rng(13);
    std::uniform_int_distribution<std::uint64_t> d(0, (1ull << 32) - 2);
    for (int i = 0; i < 1000; ++i) {
        std::uint64_t key = d(rng);
        std::uint32_t x0, y0, x1, y1;
        hilbert_d2xy(key, x0, y0);
        hilbert_d2xy(key + 1, x1, y1);
        std::uint32_t dist = (x0 > x1 ? x0 - x1 : x1 - x0) + (y0 > y1 ? y0 - y1 : y1 - y0);
        CHECK(dist == 1);
    }
}

TEST_CASE("aligned cells form contiguous aligned key blocks for both curves") {
    // The window decomposition relies on this: a 2^m-aligned cell of side
    // 2^m covers exactly the keys [d & ~(4^m-1), d | (4^m-1)].
    std::mt19937_64 rng(14);
    for (CurveKind kind : {CurveKind::Hilbert, CurveKind::ZOrder}) {
        for (int rep = 0; rep < 40; ++rep) {
            std::uint32_t m = 1 + static_cast<std::uint32_t>(rng() % 4);  // side 2..16
            std::uint32_t side = 1u << m;
            std::uint32_t cx = (static_cast<std::uint32_t>(rng()) % (65536 / side)) * side;
            std::uint32_t cy = (static_cast<std::uint32_t>(rng()) % (65536 / side)) * side;

            std::set<std::uint64_t> keys;
            for (std::uint32_t dx = 0; dx < side; ++dx)
                for (std::uint32_t dy = 0; dy < side; ++dy)
                    keys.insert(kind == CurveKind::ZOrder ? zorder_key(cx + dx, cy + dy)
                                                          : hilbert_key(cx + dx, cy + dy));

            const std::uint64_t mask = (1ull << (2 * m)) - 1;
            const std::uint64_t lo = *keys.begin() & ~mask;
            REQUIRE(keys.size() == static_cast<std::size_t>(side) * side);  // bijective
            CHECK(*keys.begin() == lo);
            CHECK(*keys.rbegin() == (lo | mask));
        }
    }
}

TEST_CASE("window decomposition covers every point and respects the budget") {
    std::mt19937_64 rng(15);
    std::uniform_real_distribution<double> ux(-180.0, 180.0), uy(-90.0, 90.0);
    for (CurveKind kind : {CurveKind::Hilbert, CurveKind::ZOrder}) {
        for (int rep = 0; rep < 30; ++rep) {
            double x1 = ux(rng), x2 = ux(rng), y1 = uy(rng), y2 = uy(rng);
            Rect w{{std::min(x1, x2), std::min(y1, y2)}, {std::max(x1, x2), std::max(y1, y2)}};
            auto ranges = decompose_window(w, kind, kWorld);
            REQUIRE(!ranges.empty());
            CHECK(ranges.size() <= 64);
            for (std::size_t i = 1; i < ranges.size(); ++i) {
                CHECK(ranges[i - 1].hi < ranges[i].lo);  // disjoint, sorted
            }
            // Any point inside the window must fall in some range.
            std::uniform_real_distribution<double> px(w.min.x, w.max.x), py(w.min.y, w.max.y);
            for (int k = 0; k < 200; ++k) {
                std::uint64_t key = curve_key({px(rng), py(rng)}, kind, kWorld);
                bool covered = false;
                for (const auto& r : ranges) covered |= (key >= r.lo && key <= r.hi);
                CHECK(covered);
            }
        }
    }
}

TEST_SUITE_END();
