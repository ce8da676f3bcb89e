#pragma once

#include <cstdint>
#include <vector>

#include "lsmrum/kernels.hpp"
#include "lsmrum/types.hpp"

namespace lsmrum {

enum class CurveKind : std::uint8_t { Hilbert = 1, ZOrder = 2 };

// Bits per dimension of the space-filling grid; keys fit in 32 bits.
inline constexpr std::uint32_t kCurveOrder = 16;

std::uint64_t zorder_key(std::uint32_t qx, std::uint32_t qy);
std::uint64_t hilbert_key(std::uint32_t qx, std::uint32_t qy);

std::uint64_t curve_key(const Location& loc, CurveKind kind, const Rect& world);

// Computes keys for a batch of points. Z-order goes through the kernel
// dispatch; Hilbert is inherently sequential per point.
void curve_keys(const double* xs, const double* ys, std::size_t n, CurveKind kind,
                const Rect& world, std::uint64_t* keys);

struct KeyRange {
    std::uint64_t lo;
    std::uint64_t hi;  // inclusive
};

// Conservative decomposition of a query window into at most max_ranges
// disjoint curve-key intervals whose union covers every cell the window
// touches. Extra coverage only costs scanned records, never results.
std::vector<KeyRange> decompose_window(const Rect& window, CurveKind kind, const Rect& world,
                                       std::size_t max_ranges = 64);

}  // namespace lsmrum
