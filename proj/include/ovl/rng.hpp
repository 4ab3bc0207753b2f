#pragma once

#include <cmath>
#include <cstdint>

namespace ovl {

// Counter-based generator: value i of a stream is a pure function of
// (key, i), so any path can be regenerated from its seed alone and results
// do not depend on how paths are split across threads.
inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t deriveSeed(std::uint64_t root, std::uint64_t index) {
    return mix64(mix64(root + 0x9e3779b97f4a7c15ULL) ^ (index * 0xd1b54a32d192ed03ULL + 0x8cb92ba72f3d8dd7ULL));
}

class CounterStream {
public:
    explicit CounterStream(std::uint64_t key, std::uint64_t start = 0) : key_(mix64(key)), ctr_(start) {}

    std::uint64_t at(std::uint64_t i) const { return mix64(key_ + (i + 1) * 0x9e3779b97f4a7c15ULL); }
    std::uint64_t next() { return at(ctr_++); }
    std::uint64_t position() const { return ctr_; }

    // Uniform on the open interval (0,1).
    static double toUniform(std::uint64_t bits) { return (double(bits >> 11) + 0.5) * 0x1.0p-53; }
    double uniform() { return toUniform(next()); }
    double exponential() { return -std::log(uniform()); }

    std::uint64_t poisson(double mean);

private:
    std::uint64_t key_;
    std::uint64_t ctr_;
};

inline std::uint64_t CounterStream::poisson(double mean) {
    if (!(mean > 0.0)) return 0;
    if (mean < 10.0) {
        const double limit = std::exp(-mean);
        std::uint64_t k = 0;
        double prod = uniform();
        while (prod > limit) {
            ++k;
            prod *= uniform();
        }
        return k;
    }
    // Hormann's transformed rejection with squeeze (PTRS).
    const double smu = std::sqrt(mean);
    const double b = 0.931 + 2.53 * smu;
    const double a = -0.059 + 0.02483 * b;
    const double invAlpha = 1.1239 + 1.1328 / (b - 3.4);
    const double vr = 0.9277 - 3.6224 / (b - 2.0);
    const double logMean = std::log(mean);
    for (;;) {
        const double U = uniform() - 0.5;
        const double V = uniform();
        const double us = 0.5 - std::fabs(U);
        const double k = std::floor((2.0 * a / us + b) * U + mean + 0.43);
        if (us >= 0.07 && V <= vr) return std::uint64_t(k);
        if (k < 0.0 || (us < 0.013 && V > us)) continue;
        if (std::log(V) + std::log(invAlpha) - std::log(a / (us * us) + b) <=
            -mean + k * logMean - std::lgamma(k + 1.0))
            return std::uint64_t(k);
    }
}

} // namespace ovl
