// AVX2/FMA variants. Compiled with -mavx2 -mfma; nothing from the standard
// library is instantiated here so no AVX code can leak into shared inline
// symbols used by the scalar paths.
#include "ovl/simd.hpp"

#if defined(__x86_64__) || defined(_M_X64)
#include <immintrin.h>

namespace ovl::simd {
namespace avx2 {
namespace {

inline __m256d polevl(__m256d x, const double* c, int n) {
    __m256d y = _mm256_set1_pd(c[0]);
    for (int i = 1; i <= n; ++i) y = _mm256_fmadd_pd(y, x, _mm256_set1_pd(c[i]));
    return y;
}

// Leading coefficient 1 implied.
inline __m256d p1evl(__m256d x, const double* c, int n) {
    __m256d y = _mm256_add_pd(x, _mm256_set1_pd(c[0]));
    for (int i = 1; i < n; ++i) y = _mm256_fmadd_pd(y, x, _mm256_set1_pd(c[i]));
    return y;
}

// Cephes exp: x = n ln2 + r, Pade form for exp(r).
inline __m256d vexp(__m256d x) {
    static const double P[] = {1.26177193074810590878E-4, 3.02994407707441961300E-2, 9.99999999999999999910E-1};
    static const double Q[] = {3.00198505138664455042E-6, 2.52448340349684104192E-3, 2.27265548208155028766E-1,
                               2.00000000000000000009E0};
    const __m256d hi = _mm256_set1_pd(709.782712893384);
    const __m256d lo = _mm256_set1_pd(-708.3964185322641);
    const __m256d over = _mm256_cmp_pd(x, hi, _CMP_GT_OQ);
    const __m256d under = _mm256_cmp_pd(x, lo, _CMP_LT_OQ);
    __m256d xc = _mm256_min_pd(_mm256_max_pd(x, lo), hi);
    const __m256d fx = _mm256_round_pd(_mm256_mul_pd(xc, _mm256_set1_pd(1.4426950408889634073599)),
                                       _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
    xc = _mm256_fnmadd_pd(fx, _mm256_set1_pd(6.93145751953125E-1), xc);
    xc = _mm256_fnmadd_pd(fx, _mm256_set1_pd(1.42860682030941723212E-6), xc);
    const __m256d xx = _mm256_mul_pd(xc, xc);
    const __m256d px = _mm256_mul_pd(xc, polevl(xx, P, 2));
    const __m256d qx = polevl(xx, Q, 3);
    __m256d e = _mm256_div_pd(px, _mm256_sub_pd(qx, px));
    e = _mm256_fmadd_pd(_mm256_set1_pd(2.0), e, _mm256_set1_pd(1.0));
    // 2^fx assembled in the exponent field; fx+1023 lies in [1, 2046] after clamping.
    const __m256d biased = _mm256_add_pd(fx, _mm256_set1_pd(1023.0 + 4503599627370496.0));
    const __m256i bits = _mm256_slli_epi64(_mm256_castpd_si256(biased), 52);
    __m256d r = _mm256_mul_pd(e, _mm256_castsi256_pd(bits));
    r = _mm256_blendv_pd(r, _mm256_set1_pd(__builtin_inf()), over);
    r = _mm256_blendv_pd(r, _mm256_setzero_pd(), under);
    return r;
}

// Cephes log for positive normal arguments.
inline __m256d vlog(__m256d x) {
    static const double P[] = {1.01875663804580931796E-4, 4.97494994976747001425E-1, 4.70579119878881725854E0,
                               1.44989225341610930846E1,  1.79368678507819816313E1,  7.70838733755885391666E0};
    static const double Q[] = {1.12873587189167450590E1, 4.52279145837532221105E1, 8.29875266912776603211E1,
                               7.11544750618563894466E1, 2.31251620126765340583E1};
    const __m256i xi = _mm256_castpd_si256(x);
    const __m256i expBits = _mm256_srli_epi64(xi, 52);
    const __m256d magic = _mm256_set1_pd(4503599627370496.0);
    __m256d e = _mm256_sub_pd(_mm256_castsi256_pd(_mm256_or_si256(expBits, _mm256_castpd_si256(magic))), magic);
    e = _mm256_sub_pd(e, _mm256_set1_pd(1022.0));
    // mantissa in [0.5, 1)
    const __m256i mantMask = _mm256_set1_epi64x(0x000FFFFFFFFFFFFFLL);
    __m256d m = _mm256_castsi256_pd(
        _mm256_or_si256(_mm256_and_si256(xi, mantMask), _mm256_set1_epi64x(0x3FE0000000000000LL)));
    const __m256d small = _mm256_cmp_pd(m, _mm256_set1_pd(0.70710678118654752440), _CMP_LT_OQ);
    e = _mm256_sub_pd(e, _mm256_and_pd(small, _mm256_set1_pd(1.0)));
    m = _mm256_sub_pd(_mm256_add_pd(m, _mm256_and_pd(small, m)), _mm256_set1_pd(1.0));
    const __m256d z = _mm256_mul_pd(m, m);
    __m256d y = _mm256_mul_pd(m, _mm256_div_pd(_mm256_mul_pd(z, polevl(m, P, 5)), p1evl(m, Q, 5)));
    y = _mm256_fnmadd_pd(e, _mm256_set1_pd(2.121944400546905827679e-4), y);
    y = _mm256_fnmadd_pd(_mm256_set1_pd(0.5), z, y);
    __m256d r = _mm256_add_pd(m, y);
    r = _mm256_fmadd_pd(e, _mm256_set1_pd(0.693359375), r);
    return r;
}

struct Octant {
    __m256d z;       // reduced argument
    __m256i j;       // octant index after rounding to even, 64-bit lanes
};

inline Octant reduce(__m256d ax) {
    const __m256d y0 = _mm256_floor_pd(_mm256_mul_pd(ax, _mm256_set1_pd(1.27323954473516268615)));
    const __m128i j32 = _mm256_cvttpd_epi32(y0);
    const __m128i odd = _mm_and_si128(j32, _mm_set1_epi32(1));
    const __m128i je = _mm_add_epi32(j32, odd);
    const __m256d y = _mm256_cvtepi32_pd(je);
    __m256d z = _mm256_fnmadd_pd(y, _mm256_set1_pd(7.85398125648498535156E-1), ax);
    z = _mm256_fnmadd_pd(y, _mm256_set1_pd(3.77489470793079817668E-8), z);
    z = _mm256_fnmadd_pd(y, _mm256_set1_pd(2.69515142907905952645E-15), z);
    return {z, _mm256_cvtepi32_epi64(_mm_and_si128(je, _mm_set1_epi32(7)))};
}

inline __m256d sinPoly(__m256d z, __m256d zz) {
    static const double S[] = {1.58962301576546568060E-10, -2.50507477628578072866E-8, 2.75573136213857245213E-6,
                               -1.98412698295895385996E-4, 8.33333333332211858878E-3,  -1.66666666666666307295E-1};
    return _mm256_fmadd_pd(_mm256_mul_pd(z, zz), polevl(zz, S, 5), z);
}

inline __m256d cosPoly(__m256d zz) {
    static const double C[] = {-1.13585365213876817300E-11, 2.08757008419747316778E-9, -2.75573141792967388112E-7,
                               2.48015872888517045348E-5,   -1.38888888888730564116E-3, 4.16666666666665929218E-2};
    const __m256d base = _mm256_fnmadd_pd(_mm256_set1_pd(0.5), zz, _mm256_set1_pd(1.0));
    return _mm256_fmadd_pd(_mm256_mul_pd(zz, zz), polevl(zz, C, 5), base);
}

inline __m256d maskOf(__m256i j, long long bit) {
    const __m256i b = _mm256_set1_epi64x(bit);
    return _mm256_castsi256_pd(_mm256_cmpeq_epi64(_mm256_and_si256(j, b), b));
}

inline __m256d vsin(__m256d x) {
    const __m256d kSign = _mm256_set1_pd(-0.0);
    const __m256d sx = _mm256_and_pd(x, kSign);
    const Octant o = reduce(_mm256_andnot_pd(kSign, x));
    const __m256d zz = _mm256_mul_pd(o.z, o.z);
    const __m256d useCos = maskOf(o.j, 2);
    __m256d r = _mm256_blendv_pd(sinPoly(o.z, zz), cosPoly(zz), useCos);
    const __m256d flip = _mm256_and_pd(maskOf(o.j, 4), kSign);
    return _mm256_xor_pd(r, _mm256_xor_pd(flip, sx));
}

inline __m256d vcos(__m256d x) {
    const __m256d kSign = _mm256_set1_pd(-0.0);
    const Octant o = reduce(_mm256_andnot_pd(kSign, x));
    const __m256d zz = _mm256_mul_pd(o.z, o.z);
    const __m256d useSin = maskOf(o.j, 2);
    __m256d r = _mm256_blendv_pd(cosPoly(zz), sinPoly(o.z, zz), useSin);
    const __m256d flip = _mm256_and_pd(_mm256_xor_pd(maskOf(o.j, 4), useSin), kSign);
    return _mm256_xor_pd(r, flip);
}

inline double hmax(__m256d v) {
    __m128d a = _mm_max_pd(_mm256_castpd256_pd128(v), _mm256_extractf128_pd(v, 1));
    a = _mm_max_sd(a, _mm_unpackhi_pd(a, a));
    return _mm_cvtsd_f64(a);
}

inline double hsum(__m256d v) {
    __m128d a = _mm_add_pd(_mm256_castpd256_pd128(v), _mm256_extractf128_pd(v, 1));
    a = _mm_add_sd(a, _mm_unpackhi_pd(a, a));
    return _mm_cvtsd_f64(a);
}

double maxPlusLinear(const double* x, const double* t, std::size_t n, double t0, double c) {
    const __m256d vc = _mm256_set1_pd(c), vt0 = _mm256_set1_pd(t0);
    __m256d m = _mm256_set1_pd(-__builtin_inf());
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) {
        const __m256d dt = _mm256_sub_pd(_mm256_loadu_pd(t + j), vt0);
        m = _mm256_max_pd(m, _mm256_fnmadd_pd(vc, dt, _mm256_loadu_pd(x + j)));
    }
    double r = hmax(m);
    for (; j < n; ++j) {
        const double v = x[j] - c * (t[j] - t0);
        r = v > r ? v : r;
    }
    return r;
}

inline __m256d powerTerm(__m256d xv, __m256d tv, __m256d vt0, __m256d vc, __m256d vg) {
    const __m256d dt = _mm256_sub_pd(tv, vt0);
    const __m256d pos = _mm256_cmp_pd(dt, _mm256_setzero_pd(), _CMP_GT_OQ);
    const __m256d safe = _mm256_blendv_pd(_mm256_set1_pd(1.0), dt, pos);
    const __m256d p = _mm256_and_pd(pos, vexp(_mm256_mul_pd(vg, vlog(safe))));
    return _mm256_fnmadd_pd(vc, p, xv);
}

double maxPlusPower(const double* x, const double* t, std::size_t n, double t0, double c, double gamma) {
    const __m256d vc = _mm256_set1_pd(c), vt0 = _mm256_set1_pd(t0), vg = _mm256_set1_pd(gamma);
    __m256d m = _mm256_set1_pd(-__builtin_inf());
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4)
        m = _mm256_max_pd(m, powerTerm(_mm256_loadu_pd(x + j), _mm256_loadu_pd(t + j), vt0, vc, vg));
    if (j < n) {
        alignas(32) double xb[4], tb[4];
        for (int k = 0; k < 4; ++k) {
            const bool in = j + k < n;
            xb[k] = in ? x[j + k] : -__builtin_inf();
            tb[k] = in ? t[j + k] : t0;
        }
        m = _mm256_max_pd(m, powerTerm(_mm256_load_pd(xb), _mm256_load_pd(tb), vt0, vc, vg));
    }
    return hmax(m);
}

double dotReverse(const double* a, const double* b, std::size_t n) {
    __m256d s0 = _mm256_setzero_pd(), s1 = _mm256_setzero_pd();
    std::size_t k = 0;
    for (; k + 8 <= n; k += 8) {
        const __m256d b0 = _mm256_permute4x64_pd(_mm256_loadu_pd(b + n - 4 - k), 0x1B);
        const __m256d b1 = _mm256_permute4x64_pd(_mm256_loadu_pd(b + n - 8 - k), 0x1B);
        s0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + k), b0, s0);
        s1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + k + 4), b1, s1);
    }
    double s = hsum(_mm256_add_pd(s0, s1));
    for (; k < n; ++k) s += a[k] * b[n - 1 - k];
    return s;
}

inline __m256d stableBlock(__m256d u1, __m256d u2, const StableCoeffs& k) {
    const __m256d V = _mm256_mul_pd(_mm256_set1_pd(3.14159265358979323846), _mm256_sub_pd(u1, _mm256_set1_pd(0.5)));
    const __m256d W = _mm256_sub_pd(_mm256_setzero_pd(), vlog(u2));
    const __m256d arg = _mm256_mul_pd(_mm256_set1_pd(k.alpha), _mm256_add_pd(V, _mm256_set1_pd(k.B)));
    const __m256d lc = vlog(vcos(V));
    const __m256d lr = _mm256_sub_pd(vlog(vcos(_mm256_sub_pd(V, arg))), vlog(W));
    __m256d lx = _mm256_fnmadd_pd(_mm256_set1_pd(1.0 / k.alpha), lc, _mm256_set1_pd(k.logS));
    lx = _mm256_fmadd_pd(_mm256_set1_pd((1.0 - k.alpha) / k.alpha), lr, lx);
    return _mm256_mul_pd(vsin(arg), vexp(lx));
}

void stableTransform(const double* u1, const double* u2, std::size_t n, const StableCoeffs& k, double* out) {
    if (k.cauchy) {
        scalarKernels().stableTransform(u1, u2, n, k, out);
        return;
    }
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(out + i, stableBlock(_mm256_loadu_pd(u1 + i), _mm256_loadu_pd(u2 + i), k));
    if (i < n) {
        alignas(32) double a[4] = {0.5, 0.5, 0.5, 0.5}, b[4] = {0.5, 0.5, 0.5, 0.5}, r[4];
        for (std::size_t q = 0; i + q < n; ++q) {
            a[q] = u1[i + q];
            b[q] = u2[i + q];
        }
        _mm256_store_pd(r, stableBlock(_mm256_load_pd(a), _mm256_load_pd(b), k));
        for (std::size_t q = 0; i + q < n; ++q) out[i + q] = r[q];
    }
}

} // namespace

// Exposed for the equivalence tests of the elementary functions.
void expBlock(const double* in, double* out) { _mm256_storeu_pd(out, vexp(_mm256_loadu_pd(in))); }
void logBlock(const double* in, double* out) { _mm256_storeu_pd(out, vlog(_mm256_loadu_pd(in))); }
void sinBlock(const double* in, double* out) { _mm256_storeu_pd(out, vsin(_mm256_loadu_pd(in))); }
void cosBlock(const double* in, double* out) { _mm256_storeu_pd(out, vcos(_mm256_loadu_pd(in))); }

const KernelTable& table() {
    static const KernelTable t{Isa::Avx2, maxPlusLinear, maxPlusPower, dotReverse, stableTransform};
    return t;
}

} // namespace avx2
} // namespace ovl::simd

#endif
