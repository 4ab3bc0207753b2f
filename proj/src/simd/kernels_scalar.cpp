#include "ovl/simd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace ovl::simd {

const char* isaName(Isa isa) {
    switch (isa) {
    case Isa::Avx2: return "avx2";
    case Isa::Neon: return "neon";
    default: return "scalar";
    }
}

StableCoeffs StableCoeffs::make(double alpha, double beta) {
    StableCoeffs k;
    k.alpha = alpha;
    k.beta = beta;
    k.cauchy = alpha == 1.0;
    if (!k.cauchy) {
        const double t = beta * std::tan(std::numbers::pi * alpha / 2.0);
        k.B = std::atan(t) / alpha;
        k.logS = std::log1p(t * t) / (2.0 * alpha);
    }
    return k;
}

namespace scalar {

double maxPlusLinear(const double* x, const double* t, std::size_t n, double t0, double c) {
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) m = std::max(m, x[j] - c * (t[j] - t0));
    return m;
}

double maxPlusPower(const double* x, const double* t, std::size_t n, double t0, double c, double gamma) {
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) m = std::max(m, x[j] - c * std::pow(t[j] - t0, gamma));
    return m;
}

double dotReverse(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t k = 0; k < n; ++k) s += a[k] * b[n - 1 - k];
    return s;
}

void stableTransform(const double* u1, const double* u2, std::size_t n, const StableCoeffs& k, double* out) {
    constexpr double pi = std::numbers::pi;
    if (k.cauchy) {
        for (std::size_t i = 0; i < n; ++i) out[i] = std::tan(pi * (u1[i] - 0.5));
        return;
    }
    const double a = k.alpha;
    const double S = std::exp(k.logS);
    for (std::size_t i = 0; i < n; ++i) {
        const double V = pi * (u1[i] - 0.5);
        const double W = -std::log(u2[i]);
        const double arg = a * (V + k.B);
        out[i] = S * std::sin(arg) / std::pow(std::cos(V), 1.0 / a) *
                 std::pow(std::cos(V - arg) / W, (1.0 - a) / a);
    }
}

} // namespace scalar

const KernelTable& scalarKernels() {
    static const KernelTable t{Isa::Scalar, scalar::maxPlusLinear, scalar::maxPlusPower, scalar::dotReverse,
                               scalar::stableTransform};
    return t;
}

} // namespace ovl::simd
