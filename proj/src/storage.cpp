#include "ovl/storage.hpp"

#include "ovl/errors.hpp"
#include "ovl/simd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ovl {

double horizonRule(double u, double gamma, double c, double kappa) {
    if (!(u > 0.0) || !(kappa > 0.0)) throw PreconditionError("horizonRule needs u > 0 and kappa > 0");
    if (!(c > 0.0) || !(gamma > 0.0)) throw PreconditionError("horizonRule needs c > 0 and gamma > 0");
    return kappa * std::pow(u / c, 1.0 / gamma);
}

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// last index j >= e with t[j] <= t[e] + h
std::size_t horizonEnd(const double* t, std::size_t n, std::size_t e, double h) {
    const double lim = t[e] + h;
    const double* it = std::upper_bound(t + e, t + n, lim * (1.0 + 1e-15));
    return std::size_t(it - t) - 1;
}

double gridSup(const double* x, const double* t, std::size_t e, std::size_t last, double c, double gamma,
               const simd::KernelTable& k) {
    const std::size_t cnt = last - e + 1;
    const double m = gamma == 1.0 ? k.maxPlusLinear(x + e, t + e, cnt, t[e], c)
                                  : k.maxPlusPower(x + e, t + e, cnt, t[e], c, gamma);
    return std::max(0.0, m - x[e]);
}

} // namespace

void storageOnGrid(const double* x, const double* t, std::size_t n, std::size_t evalCount, double c, double gamma,
                   double horizon, double* Y) {
    if (evalCount == 0) return;
    if (evalCount > n) throw PreconditionError("more eval points than grid points");
    const auto& k = simd::active();
    const std::size_t w = evalCount - 1;
    const bool split = gamma == 1.0 && horizonEnd(t, n, 0, horizon) >= w;
    if (!split) {
        for (std::size_t e = 0; e < evalCount; ++e) Y[e] = gridSup(x, t, e, horizonEnd(t, n, e, horizon), c, gamma, k);
        return;
    }
    // Z = X - c t: suffix maxima inside the eval range, prefix maxima beyond it
    thread_local std::vector<double> suffix, prefix;
    suffix.assign(evalCount, kNegInf);
    double run = kNegInf;
    for (std::size_t e = evalCount; e-- > 0;) {
        run = std::max(run, x[e] - c * t[e]);
        suffix[e] = run;
    }
    const std::size_t lastNeeded = horizonEnd(t, n, w, horizon);
    prefix.assign(lastNeeded + 1, kNegInf);
    run = kNegInf;
    for (std::size_t j = w; j <= lastNeeded; ++j) {
        run = std::max(run, x[j] - c * t[j]);
        prefix[j] = run;
    }
    std::size_t J = horizonEnd(t, n, 0, horizon);
    for (std::size_t e = 0; e < evalCount; ++e) {
        while (J + 1 < n && t[J + 1] <= (t[e] + horizon) * (1.0 + 1e-15)) ++J;
        const double m = std::max(suffix[e], prefix[J]);
        Y[e] = std::max(0.0, m - (x[e] - c * t[e]));
    }
}

namespace {

StorageSeries gridStorage(const SamplePath& p, double c, double gamma, const std::vector<double>& evalTimes,
                          double horizon) {
    const auto& t = p.times;
    const auto& k = simd::active();
    StorageSeries out;
    out.evalTimes = evalTimes;
    out.horizon = horizon;
    out.gridPoints = t.size();
    for (double te : evalTimes) {
        auto it = std::lower_bound(t.begin(), t.end(), te * (1.0 - 1e-13) - 1e-300);
        if (it == t.end() || std::fabs(*it - te) > 1e-12 * std::max(1.0, std::fabs(te)))
            throw PreconditionError("eval time is not a grid time of the path");
        const std::size_t e = std::size_t(it - t.begin());
        out.Y.push_back(gridSup(p.values.data(), t.data(), e, horizonEnd(t.data(), t.size(), e, horizon), c, gamma, k));
    }
    return out;
}

StorageSeries jumpStorage(const SamplePath& p, double c, double gamma, const std::vector<double>& evalTimes,
                          double horizon) {
    const auto& t = p.times;
    const auto& v = p.values;
    const DriftCurve& d = *p.drift;
    StorageSeries out;
    out.evalTimes = evalTimes;
    out.horizon = horizon;
    out.gridPoints = t.size();
    for (double te : evalTimes) {
        // index of the last point at or before te; the jump level there is v - drift
        std::size_t i = std::size_t(std::upper_bound(t.begin(), t.end(), te) - t.begin()) - 1;
        const double J0 = v[i] - d(t[i]);
        const double X0 = J0 + d(te);
        const double end = te + horizon;
        double best = 0.0;
        auto consider = [&](double level, double s) {
            best = std::max(best, level + d(s) - X0 - c * std::pow(s - te, gamma));
        };
        // segment [a, b] with constant jump level
        auto segment = [&](double level, double a, double b) {
            consider(level, a);
            consider(level, b);
            auto slope = [&](double s) { return d.derivative(s) - c * gamma * std::pow(s - te, gamma - 1.0); };
            double lo = a, hi = b;
            if (!(b > a) || !(slope(lo) > 0.0) || !(slope(hi) < 0.0)) return;
            for (int it = 0; it < 80 && hi - lo > 1e-14 * hi; ++it) {
                const double mid = 0.5 * (lo + hi);
                (slope(mid) > 0.0 ? lo : hi) = mid;
            }
            consider(level, 0.5 * (lo + hi));
        };
        double a = te, level = J0;
        for (std::size_t j = i + 1; j < t.size() && t[j] <= end; ++j) {
            segment(level, a, t[j]);  // left limit at the jump
            level = v[j] - d(t[j]);
            a = t[j];
            consider(level, a);
        }
        segment(level, a, end);
        out.Y.push_back(best);
    }
    return out;
}

} // namespace

StorageSeries storageValues(const SamplePath& path, double c, double gamma, const std::vector<double>& evalTimes,
                            double horizon) {
    if (path.times.empty() || path.times.size() != path.values.size())
        throw PreconditionError("malformed sample path");
    if (!(c > 0.0) || !(gamma > 0.0) || !(horizon >= 0.0)) throw PreconditionError("storage needs c, gamma > 0");
    const double extent = path.times.back();
    for (double te : evalTimes) {
        if (te < 0.0) throw PreconditionError("eval times must be nonnegative");
        if (te + horizon > extent * (1.0 + 1e-12))
            throw PreconditionError("horizon exceeds the path extent: t + T_h = " + std::to_string(te + horizon) +
                                    " > " + std::to_string(extent));
    }
    return path.drift ? jumpStorage(path, c, gamma, evalTimes, horizon) : gridStorage(path, c, gamma, evalTimes, horizon);
}

} // namespace ovl
