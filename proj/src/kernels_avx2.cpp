#if defined(__AVX2__)

#include <immintrin.h>

#include "lsmrum/kernels.hpp"

namespace lsmrum::kernels {

namespace {

std::size_t filter_in_rect_avx2(const double* xs, const double* ys, std::size_t n,
                                const Rect& window, std::uint32_t base_index,
                                std::vector<std::uint32_t>& out) {
    const __m256d min_x = _mm256_set1_pd(window.min.x);
    const __m256d max_x = _mm256_set1_pd(window.max.x);
    const __m256d min_y = _mm256_set1_pd(window.min.y);
    const __m256d max_y = _mm256_set1_pd(window.max.y);

    std::size_t matches = 0;
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d vx = _mm256_loadu_pd(xs + i);
        __m256d vy = _mm256_loadu_pd(ys + i);
        __m256d m = _mm256_and_pd(
            _mm256_and_pd(_mm256_cmp_pd(vx, min_x, _CMP_GE_OQ), _mm256_cmp_pd(vx, max_x, _CMP_LE_OQ)),
            _mm256_and_pd(_mm256_cmp_pd(vy, min_y, _CMP_GE_OQ), _mm256_cmp_pd(vy, max_y, _CMP_LE_OQ)));
        int mask = _mm256_movemask_pd(m);
        while (mask) {
            int k = __builtin_ctz(mask);
            out.push_back(base_index + static_cast<std::uint32_t>(i + k));
            ++matches;
            mask &= mask - 1;
        }
    }
    for (; i < n; ++i) {
        if (xs[i] >= window.min.x && xs[i] <= window.max.x && ys[i] >= window.min.y &&
            ys[i] <= window.max.y) {
            out.push_back(base_index + static_cast<std::uint32_t>(i));
            ++matches;
        }
    }
    return matches;
}

// Same spread sequence as spread16, on four 64-bit lanes at once.
inline __m256i spread16x4(__m256i v) {
    const __m256i m8 = _mm256_set1_epi64x(0x00FF00FFll);
    const __m256i m4 = _mm256_set1_epi64x(0x0F0F0F0Fll);
    const __m256i m2 = _mm256_set1_epi64x(0x33333333ll);
    const __m256i m1 = _mm256_set1_epi64x(0x55555555ll);
    v = _mm256_and_si256(_mm256_or_si256(v, _mm256_slli_epi64(v, 8)), m8);
    v = _mm256_and_si256(_mm256_or_si256(v, _mm256_slli_epi64(v, 4)), m4);
    v = _mm256_and_si256(_mm256_or_si256(v, _mm256_slli_epi64(v, 2)), m2);
    v = _mm256_and_si256(_mm256_or_si256(v, _mm256_slli_epi64(v, 1)), m1);
    return v;
}

inline __m256i quantize16x4(__m256d v, __m256d min_v, __m256d scale) {
    __m256d t = _mm256_mul_pd(_mm256_sub_pd(v, min_v), scale);
    t = _mm256_max_pd(t, _mm256_setzero_pd());
    t = _mm256_min_pd(t, _mm256_set1_pd(65535.0));
    // Truncating convert matches the scalar cast.
    __m128i q32 = _mm256_cvttpd_epi32(t);
    return _mm256_cvtepu32_epi64(q32);
}

void zorder_keys_avx2(const double* xs, const double* ys, std::size_t n,
                      const Rect& world, std::uint64_t* keys) {
    const double sx = 65536.0 / (world.max.x - world.min.x);
    const double sy = 65536.0 / (world.max.y - world.min.y);
    const __m256d vsx = _mm256_set1_pd(sx);
    const __m256d vsy = _mm256_set1_pd(sy);
    const __m256d vminx = _mm256_set1_pd(world.min.x);
    const __m256d vminy = _mm256_set1_pd(world.min.y);

    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256i qx = quantize16x4(_mm256_loadu_pd(xs + i), vminx, vsx);
        __m256i qy = quantize16x4(_mm256_loadu_pd(ys + i), vminy, vsy);
        __m256i key = _mm256_or_si256(spread16x4(qx), _mm256_slli_epi64(spread16x4(qy), 1));
        _mm256_storeu_si256(reinterpret_cast<__m256i*>(keys + i), key);
    }
    for (; i < n; ++i) {
        std::uint32_t qx = quantize16(xs[i], world.min.x, sx);
        std::uint32_t qy = quantize16(ys[i], world.min.y, sy);
        keys[i] = spread16(qx) | (spread16(qy) << 1);
    }
}

}  // namespace

const KernelSet* avx2_kernel_set_impl() {
    static const KernelSet k{"avx2", &filter_in_rect_avx2, &zorder_keys_avx2};
    return &k;
}

}  // namespace lsmrum::kernels

#endif  // __AVX2__
