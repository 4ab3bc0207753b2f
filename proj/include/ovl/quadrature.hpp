#pragma once

// Adaptive quadrature built on Boost's Gauss-Kronrod rule. Boost supplies the
// 21-point rule and its embedded error estimate; the global bisection loop and
// the outward panel expansion for infinite ranges live here because they need
// an absolute floor and an explicit divergence report.

#include "ovl/errors.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <string>
#include <vector>

namespace ovl {

struct QuadOptions {
    double absTol = 0.0;
    double relTol = 1e-10;
    unsigned maxDepth = 30;        // bisection depth limit per subinterval
    std::size_t maxIntervals = 4000;
};

template <class T>
struct QuadResult {
    T value{};
    double error = 0.0;
    bool converged = true;
};

namespace detail {

template <class T>
double magnitude(const T& v) { return std::abs(v); }

// Boost (1.74) reports the single-rule error on the reference interval
// [-1,1]; it is rescaled here by the half-width.
template <class F>
auto gkRule(F& f, double a, double b, double* err) {
    using GK = boost::math::quadrature::gauss_kronrod<double, 21>;
    auto v = GK::integrate(f, a, b, 0, 0.0, err);
    *err *= 0.5 * std::fabs(b - a);
    return v;
}

} // namespace detail

// Global adaptive bisection on [a,b]: the subinterval with the largest error
// estimate is split until sum(err) <= max(absTol, relTol*|I|).
template <class F>
auto adaptiveGK(F f, double a, double b, const QuadOptions& opt = {})
    -> QuadResult<decltype(f(a))> {
    using T = decltype(f(a));
    QuadResult<T> out;
    if (a == b) return out;
    struct Piece { double a, b; T v; double e; unsigned depth; };
    auto eval = [&](double lo, double hi, unsigned depth) {
        double e = 0.0;
        T v = detail::gkRule(f, lo, hi, &e);
        return Piece{lo, hi, v, e, depth};
    };
    auto cmp = [](const Piece& x, const Piece& y) { return x.e < y.e; };
    std::vector<Piece> heap;
    heap.push_back(eval(a, b, 0));
    T total = heap.front().v;
    double err = heap.front().e;
    double frozenErr = 0.0;  // error of pieces that hit the depth limit
    while (true) {
        const double tol = std::max(opt.absTol, opt.relTol * detail::magnitude(total + out.value));
        if (err + frozenErr <= tol) break;
        if (heap.empty() || heap.size() >= opt.maxIntervals) {
            out.converged = false;
            break;
        }
        std::pop_heap(heap.begin(), heap.end(), cmp);
        Piece p = heap.back();
        heap.pop_back();
        if (p.depth >= opt.maxDepth) {
            frozenErr += p.e;
            total -= p.v;
            out.value += p.v;
            err -= p.e;
            out.converged = false;
            // the frozen error alone exceeds the target: more splitting cannot help
            if (frozenErr > std::max(opt.absTol, opt.relTol * detail::magnitude(total + out.value))) break;
            continue;
        }
        const double mid = 0.5 * (p.a + p.b);
        Piece l = eval(p.a, mid, p.depth + 1);
        Piece r = eval(mid, p.b, p.depth + 1);
        total += l.v + r.v - p.v;
        err += l.e + r.e - p.e;
        heap.push_back(l);
        std::push_heap(heap.begin(), heap.end(), cmp);
        heap.push_back(r);
        std::push_heap(heap.begin(), heap.end(), cmp);
    }
    // Recompute from the pieces to shed accumulated rounding in the running sums.
    T sum = out.value;
    double esum = frozenErr;
    for (const auto& p : heap) {
        sum += p.v;
        esum += p.e;
    }
    out.value = sum;
    out.error = esum;
    if (!std::isfinite(detail::magnitude(out.value))) out.converged = false;
    return out;
}

// Sum of adaptiveGK over consecutive breakpoints.
template <class F>
auto integrateBreaks(F f, const std::vector<double>& breaks, const QuadOptions& opt = {})
    -> QuadResult<decltype(f(0.0))> {
    QuadResult<decltype(f(0.0))> out;
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
        auto r = adaptiveGK(f, breaks[i], breaks[i + 1], opt);
        out.value += r.value;
        out.error += r.error;
        out.converged = out.converged && r.converged;
    }
    return out;
}

struct OutwardOptions {
    double firstWidth = 0.5;
    double growth = 1.5;
    double maxWidth = 8.0;
    unsigned maxPanels = 400;
    double negligible = 1e-16;  // panel considered empty below this share of |I|
    double absFloor = 0.0;
};

enum class Side { Lower, Upper };

// Integral over [lo, hi] where either end may be infinite. The finite core
// [coreLo, coreHi] (with interior breakpoints) is done first; infinite ends
// are covered by panels of growing width until two consecutive panels are
// negligible. A tail that never dies out is reported as divergence with the
// offending side named in the message.
template <class F>
auto integrateOutward(F f, std::vector<double> core, bool lowerInfinite, bool upperInfinite,
                      const QuadOptions& opt = {}, const OutwardOptions& oo = {})
    -> QuadResult<decltype(f(0.0))> {
    std::sort(core.begin(), core.end());
    auto out = integrateBreaks(f, core, opt);
    auto extend = [&](Side side) {
        double edge = side == Side::Lower ? core.front() : core.back();
        double w = oo.firstWidth;
        int quiet = 0;
        for (unsigned k = 0; k < oo.maxPanels; ++k) {
            const double next = side == Side::Lower ? edge - w : edge + w;
            auto r = side == Side::Lower ? adaptiveGK(f, next, edge, opt) : adaptiveGK(f, edge, next, opt);
            out.value += r.value;
            out.error += r.error;
            out.converged = out.converged && r.converged;
            const double m = detail::magnitude(r.value) + r.error;
            if (m <= oo.negligible * detail::magnitude(out.value) + oo.absFloor) {
                if (++quiet >= 2) return;
            } else {
                quiet = 0;
            }
            edge = next;
            w = std::min(w * oo.growth, oo.maxWidth);
        }
        throw NumericalError(std::string("integral divergent towards ") +
                                 (side == Side::Lower ? "the lower end" : "the upper end"),
                             detail::magnitude(out.value));
    };
    if (lowerInfinite) extend(Side::Lower);
    if (upperInfinite) extend(Side::Upper);
    return out;
}

} // namespace ovl
