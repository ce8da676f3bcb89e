#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "lsmrum/types.hpp"

namespace lsmrum::kernels {

// 16-bit quantization of a coordinate into the world grid. scale is
// 65536 / extent. Out-of-box values clamp to the boundary cell. The scalar
// and AVX2 paths must keep this exact arithmetic (subtract, multiply, clamp,
// truncate) so their outputs are bit-identical.
inline std::uint32_t quantize16(double v, double min_v, double scale) {
    double t = (v - min_v) * scale;
    if (t < 0.0) t = 0.0;
    if (t > 65535.0) t = 65535.0;
    return static_cast<std::uint32_t>(t);
}

// Spreads the low 16 bits of v to the even bit positions of the result.
inline std::uint64_t spread16(std::uint32_t v) {
    std::uint64_t x = v & 0xFFFFu;
    x = (x | (x << 8)) & 0x00FF00FFull;
    x = (x | (x << 4)) & 0x0F0F0F0Full;
    x = (x | (x << 2)) & 0x33333333ull;
    x = (x | (x << 1)) & 0x55555555ull;
    return x;
}

// Appends (base_index + i) to out for every point i inside the closed
// window. Returns the number of matches. Inputs must be finite.
using FilterFn = std::size_t (*)(const double* xs, const double* ys, std::size_t n,
                                 const Rect& window, std::uint32_t base_index,
                                 std::vector<std::uint32_t>& out);

// Writes the 32-bit Z-order key (x bits even, y bits odd) of each point,
// quantized into the world box, to keys[0..n).
using ZOrderFn = void (*)(const double* xs, const double* ys, std::size_t n,
                          const Rect& world, std::uint64_t* keys);

struct KernelSet {
    const char* name;
    FilterFn filter_in_rect;
    ZOrderFn zorder_keys;
};

std::size_t filter_in_rect_scalar(const double* xs, const double* ys, std::size_t n,
                                  const Rect& window, std::uint32_t base_index,
                                  std::vector<std::uint32_t>& out);
void zorder_keys_scalar(const double* xs, const double* ys, std::size_t n,
                        const Rect& world, std::uint64_t* keys);

const KernelSet& scalar_kernels();

// nullptr when the binary was built without AVX2 support or the CPU lacks it.
const KernelSet* avx2_kernels();

// Best kernel set for this machine, resolved once at first use.
const KernelSet& active_kernels();

}  // namespace lsmrum::kernels
