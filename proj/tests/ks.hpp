#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

// Two-sample Kolmogorov-Smirnov statistic and its asymptotic p-value.
inline double ksStatistic(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = double(a.size()), nb = double(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        d = std::max(d, std::fabs(double(i) / na - double(j) / nb));
    }
    return d;
}

// P(D > d) under the null, Kolmogorov limit law with the Stephens correction.
inline double ksPValue(double d, std::size_t na, std::size_t nb) {
    const double ne = double(na) * double(nb) / double(na + nb);
    const double s = std::sqrt(ne);
    const double lam = (s + 0.12 + 0.11 / s) * d;
    if (lam < 0.2) return 1.0;
    double q = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = 2.0 * ((k % 2) ? 1.0 : -1.0) * std::exp(-2.0 * k * k * lam * lam);
        q += term;
        if (std::fabs(term) < 1e-16) break;
    }
    return std::clamp(q, 0.0, 1.0);
}

inline double ksTwoSample(const std::vector<double>& a, const std::vector<double>& b) {
    return ksPValue(ksStatistic(a, b), a.size(), b.size());
}

// mean and standard error
struct Moments {
    double mean = 0.0, stderr_ = 0.0;
};

inline Moments moments(const std::vector<double>& x) {
    double s = 0.0, s2 = 0.0;
    for (double v : x) s += v;
    const double m = s / double(x.size());
    for (double v : x) s2 += (v - m) * (v - m);
    return {m, std::sqrt(s2 / double(x.size() - 1) / double(x.size()))};
}
