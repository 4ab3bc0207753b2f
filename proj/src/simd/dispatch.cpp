#include "ovl/simd.hpp"

#include <cstdlib>
#include <string>

namespace ovl::simd {

#if defined(__x86_64__) || defined(_M_X64)
namespace avx2 { const KernelTable& table(); }
#endif
#if defined(__aarch64__) && defined(__ARM_NEON)
namespace neon { const KernelTable& table(); }
#endif

const KernelTable* avx2Kernels() {
#if defined(__x86_64__) || defined(_M_X64)
    static const bool ok = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
    return ok ? &avx2::table() : nullptr;
#else
    return nullptr;
#endif
}

const KernelTable* neonKernels() {
#if defined(__aarch64__) && defined(__ARM_NEON)
    return &neon::table();
#else
    return nullptr;
#endif
}

namespace {

const KernelTable* choose() {
    const char* env = std::getenv("OVL_SIMD");
    const std::string want = env ? env : "";
    if (want == "scalar") return &scalarKernels();
    if (want == "avx2" && avx2Kernels()) return avx2Kernels();
    if (want == "neon" && neonKernels()) return neonKernels();
    if (const auto* t = avx2Kernels()) return t;
    if (const auto* t = neonKernels()) return t;
    return &scalarKernels();
}

} // namespace

const KernelTable& active() {
    static const KernelTable* t = choose();
    return *t;
}

} // namespace ovl::simd
