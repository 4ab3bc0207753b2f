#pragma once

#include <cstddef>

namespace ovl::simd {

enum class Isa { Scalar, Avx2, Neon };

const char* isaName(Isa isa);

// Parameters of the Chambers-Mallows-Stuck map, precomputed once per (alpha, beta).
struct StableCoeffs {
    double alpha = 1.5;
    double beta = 0.0;
    double B = 0.0;       // atan(beta tan(pi alpha/2)) / alpha
    double logS = 0.0;    // log of (1 + beta^2 tan^2(pi alpha/2))^(1/(2 alpha))
    bool cauchy = false;  // alpha == 1 (beta == 0 enforced upstream)

    static StableCoeffs make(double alpha, double beta);
};

struct KernelTable {
    Isa isa;
    // max_j (x[j] - c (t[j]-t0))
    double (*maxPlusLinear)(const double* x, const double* t, std::size_t n, double t0, double c);
    // max_j (x[j] - c (t[j]-t0)^gamma), t[j] >= t0
    double (*maxPlusPower)(const double* x, const double* t, std::size_t n, double t0, double c,
                           double gamma);
    // sum_k a[k] * b[n-1-k]
    double (*dotReverse)(const double* a, const double* b, std::size_t n);
    // unit-scale S_alpha(1, beta, 0) variates from two arrays of uniforms on (0,1)
    void (*stableTransform)(const double* u1, const double* u2, std::size_t n, const StableCoeffs& k,
                            double* out);
};

const KernelTable& scalarKernels();
// nullptr when the variant is not compiled in or the CPU lacks the feature.
const KernelTable* avx2Kernels();
const KernelTable* neonKernels();

// Best available table; OVL_SIMD=scalar|avx2|neon overrides the choice.
const KernelTable& active();

} // namespace ovl::simd
