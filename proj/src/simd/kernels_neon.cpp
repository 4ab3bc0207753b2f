// NEON variants for the two reductions. The transcendental kernels (power
// max-plus, stable transform) fall back to the scalar reference on ARM.
#include "ovl/simd.hpp"

#if defined(__aarch64__) && defined(__ARM_NEON)
#include <arm_neon.h>

namespace ovl::simd {
namespace neon {
namespace {

double maxPlusLinear(const double* x, const double* t, std::size_t n, double t0, double c) {
    const float64x2_t vc = vdupq_n_f64(c), vt0 = vdupq_n_f64(t0);
    float64x2_t m = vdupq_n_f64(-__builtin_inf());
    std::size_t j = 0;
    for (; j + 2 <= n; j += 2) {
        const float64x2_t dt = vsubq_f64(vld1q_f64(t + j), vt0);
        m = vmaxq_f64(m, vfmsq_f64(vld1q_f64(x + j), vc, dt));
    }
    double r = vmaxvq_f64(m);
    for (; j < n; ++j) {
        const double v = x[j] - c * (t[j] - t0);
        r = v > r ? v : r;
    }
    return r;
}

double dotReverse(const double* a, const double* b, std::size_t n) {
    float64x2_t s = vdupq_n_f64(0.0);
    std::size_t k = 0;
    for (; k + 2 <= n; k += 2) {
        const float64x2_t bv = vextq_f64(vld1q_f64(b + n - 2 - k), vld1q_f64(b + n - 2 - k), 1);
        s = vfmaq_f64(s, vld1q_f64(a + k), bv);
    }
    double r = vaddvq_f64(s);
    for (; k < n; ++k) r += a[k] * b[n - 1 - k];
    return r;
}

} // namespace

const KernelTable& table() {
    static const KernelTable t{Isa::Neon, maxPlusLinear, scalarKernels().maxPlusPower, dotReverse,
                               scalarKernels().stableTransform};
    return t;
}

} // namespace neon
} // namespace ovl::simd

#endif
