#include "lsmrum/kernels.hpp"

namespace lsmrum::kernels {

#if defined(LSMRUM_HAVE_AVX2_BUILD)
const KernelSet* avx2_kernel_set_impl();
#endif

const KernelSet* avx2_kernels() {
#if defined(LSMRUM_HAVE_AVX2_BUILD) && (defined(__x86_64__) || defined(_M_X64))
    if (__builtin_cpu_supports("avx2")) return avx2_kernel_set_impl();
#endif
    return nullptr;
}

const KernelSet& active_kernels() {
    static const KernelSet* chosen = [] {
        if (const KernelSet* k = avx2_kernels()) return k;
        return &scalar_kernels();
    }();
    return *chosen;
}

}  // namespace lsmrum::kernels
