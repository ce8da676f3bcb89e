#include "lsmrum/curve.hpp"

#include <algorithm>
#include <utility>

namespace lsmrum {

std::uint64_t zorder_key(std::uint32_t qx, std::uint32_t qy) {
    return kernels::spread16(qx) | (kernels::spread16(qy) << 1);
}

std::uint64_t hilbert_key(std::uint32_t qx, std::uint32_t qy) {
    std::uint32_t x = qx & 0xFFFFu;
    std::uint32_t y = qy & 0xFFFFu;
    constexpr std::uint32_t n_minus_1 = (1u << kCurveOrder) - 1;
    std::uint64_t d = 0;
    for (std::uint32_t s = 1u << (kCurveOrder - 1); s > 0; s >>= 1) {
        std::uint32_t rx = (x & s) ? 1u : 0u;
        std::uint32_t ry = (y & s) ? 1u : 0u;
        d += static_cast<std::uint64_t>(s) * s * ((3u * rx) ^ ry);
        if (ry == 0) {
            if (rx == 1) {
                x = n_minus_1 - x;
                y = n_minus_1 - y;
            }
            std::swap(x, y);
        }
    }
    return d;
}

namespace {

struct Grid {
    double min_x, min_y, sx, sy;
    explicit Grid(const Rect& world)
        : min_x(world.min.x),
          min_y(world.min.y),
          sx(65536.0 / (world.max.x - world.min.x)),
          sy(65536.0 / (world.max.y - world.min.y)) {}
    std::uint32_t qx(double x) const { return kernels::quantize16(x, min_x, sx); }
    std::uint32_t qy(double y) const { return kernels::quantize16(y, min_y, sy); }
};

std::uint64_t key_of_cell(std::uint32_t cx, std::uint32_t cy, CurveKind kind) {
    return kind == CurveKind::ZOrder ? zorder_key(cx, cy) : hilbert_key(cx, cy);
}

struct QuantWindow {
    std::uint32_t x0, y0, x1, y1;
};

// Quadtree walk over the grid. Every axis-aligned cell of side 2^level with
// aligned corner maps to one contiguous, 4^level-aligned key block for both
// curves, so a covering block is key(corner) with the low 2*level bits
// cleared/set.
void visit(std::uint32_t cx, std::uint32_t cy, std::uint32_t level, const QuantWindow& w,
           CurveKind kind, std::size_t raw_cap, std::vector<KeyRange>& out) {
    const std::uint32_t side = 1u << level;
    const std::uint32_t x1 = cx + side - 1, y1 = cy + side - 1;
    if (x1 < w.x0 || cx > w.x1 || y1 < w.y0 || cy > w.y1) return;

    const bool inside = cx >= w.x0 && x1 <= w.x1 && cy >= w.y0 && y1 <= w.y1;
    if (inside || level == 0 || out.size() >= raw_cap) {
        const std::uint64_t mask = (level >= 32) ? ~0ull : ((1ull << (2 * level)) - 1);
        const std::uint64_t d = key_of_cell(cx, cy, kind);
        out.push_back(KeyRange{d & ~mask, d | mask});
        return;
    }
    const std::uint32_t h = side >> 1;
    visit(cx, cy, level - 1, w, kind, raw_cap, out);
    visit(cx + h, cy, level - 1, w, kind, raw_cap, out);
    visit(cx, cy + h, level - 1, w, kind, raw_cap, out);
    visit(cx + h, cy + h, level - 1, w, kind, raw_cap, out);
}

}  // namespace

std::uint64_t curve_key(const Location& loc, CurveKind kind, const Rect& world) {
    Grid g(world);
    return key_of_cell(g.qx(loc.x), g.qy(loc.y), kind);
}

void curve_keys(const double* xs, const double* ys, std::size_t n, CurveKind kind,
                const Rect& world, std::uint64_t* keys) {
    if (kind == CurveKind::ZOrder) {
        kernels::active_kernels().zorder_keys(xs, ys, n, world, keys);
        return;
    }
    Grid g(world);
    for (std::size_t i = 0; i < n; ++i) keys[i] = hilbert_key(g.qx(xs[i]), g.qy(ys[i]));
}

std::vector<KeyRange> decompose_window(const Rect& window, CurveKind kind, const Rect& world,
                                       std::size_t max_ranges) {
    Grid g(world);
    QuantWindow w{g.qx(window.min.x), g.qy(window.min.y), g.qx(window.max.x), g.qy(window.max.y)};

    std::vector<KeyRange> raw;
    visit(0, 0, kCurveOrder, w, kind, std::max<std::size_t>(max_ranges * 4, 16), raw);

    std::sort(raw.begin(), raw.end(), [](const KeyRange& a, const KeyRange& b) { return a.lo < b.lo; });
    std::vector<KeyRange> merged;
    for (const KeyRange& r : raw) {
        if (!merged.empty() && r.lo <= merged.back().hi + 1)
            merged.back().hi = std::max(merged.back().hi, r.hi);
        else
            merged.push_back(r);
    }
    // Over budget: close the smallest gaps first (conservative widening).
    while (merged.size() > max_ranges) {
        std::size_t best = 1;
        std::uint64_t best_gap = ~0ull;
        for (std::size_t i = 1; i < merged.size(); ++i) {
            std::uint64_t gap = merged[i].lo - merged[i - 1].hi;
            if (gap < best_gap) {
                best_gap = gap;
                best = i;
            }
        }
        merged[best - 1].hi = merged[best].hi;
        merged.erase(merged.begin() + best);
    }
    return merged;
}

}  // namespace lsmrum
