#include "lsmrum/kernels.hpp"

namespace lsmrum::kernels {

std::size_t filter_in_rect_scalar(const double* xs, const double* ys, std::size_t n,
                                  const Rect& window, std::uint32_t base_index,
                                  std::vector<std::uint32_t>& out) {
    std::size_t matches = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (xs[i] >= window.min.x && xs[i] <= window.max.x && ys[i] >= window.min.y &&
            ys[i] <= window.max.y) {
            out.push_back(base_index + static_cast<std::uint32_t>(i));
            ++matches;
        }
    }
    return matches;
}

void zorder_keys_scalar(const double* xs, const double* ys, std::size_t n,
                        const Rect& world, std::uint64_t* keys) {
    const double sx = 65536.0 / (world.max.x - world.min.x);
    const double sy = 65536.0 / (world.max.y - world.min.y);
    for (std::size_t i = 0; i < n; ++i) {
        std::uint32_t qx = quantize16(xs[i], world.min.x, sx);
        std::uint32_t qy = quantize16(ys[i], world.min.y, sy);
        keys[i] = spread16(qx) | (spread16(qy) << 1);
    }
}

const KernelSet& scalar_kernels() {
    static const KernelSet k{"scalar", &filter_in_rect_scalar, &zorder_keys_scalar};
    return k;
}

}  // namespace lsmrum::kernels
