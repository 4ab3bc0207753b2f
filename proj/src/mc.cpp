#include "ovl/mc.hpp"

#include "ovl/errors.hpp"
#include "ovl/pathgen.hpp"
#include "ovl/rng.hpp"
#include "ovl/simd.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <thread>

namespace ovl {

const char* overloadKindName(OverloadKind k) {
    switch (k) {
    case OverloadKind::WindowSup: return "windowSup";
    case OverloadKind::WindowInf: return "windowInf";
    default: return "point";
    }
}

Interval wilson(std::uint64_t k, std::uint64_t n, double z) {
    if (n == 0) return {0.0, 1.0};
    const double nn = double(n), p = double(k) / nn, z2 = z * z;
    const double den = 1.0 + z2 / nn;
    const double mid = (p + z2 / (2.0 * nn)) / den;
    const double half = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / den;
    Interval ci{std::max(0.0, mid - half), std::min(1.0, mid + half)};
    if (k == 0) ci.lo = 0.0;
    if (k == n) ci.hi = 1.0;
    return ci;
}

std::uint64_t levelSeed(std::uint64_t rootSeed, double u) { return deriveSeed(rootSeed, std::bit_cast<std::uint64_t>(u)); }

namespace {

unsigned threadCount(const SimulationSpec& spec) {
    if (spec.threads > 0) return spec.threads;
    if (const char* env = std::getenv("OVL_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v > 0) return unsigned(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

[[noreturn]] void rethrowAt(const Error& e, std::uint64_t path) {
    const std::string msg = "path " + std::to_string(path) + ": " + e.what();
    switch (e.kind()) {
    case ErrorKind::Config: throw ConfigError(msg);
    case ErrorKind::Precondition: throw PreconditionError(msg);
    case ErrorKind::Budget: throw BudgetError(msg);
    case ErrorKind::Invariant: throw InvariantError(msg);
    default: throw NumericalError(msg);
    }
}

struct Counts {
    std::uint64_t point = 0, point0 = 0, sup = 0, inf = 0;
};

void tally(const std::vector<double>& Y, std::size_t evalCount, double u, Counts& c) {
    double mx = -std::numeric_limits<double>::infinity(), mn = std::numeric_limits<double>::infinity();
    for (std::size_t e = 0; e < evalCount; ++e) {
        mx = std::max(mx, Y[e]);
        mn = std::min(mn, Y[e]);
    }
    c.point += Y[evalCount - 1] > u;
    c.point0 += Y[0] > u;
    c.sup += mx > u;
    c.inf += mn > u;
}

// Runs body(first, last, counts) over contiguous index ranges and sums the counts.
template <class Body>
std::vector<Counts> parallelCounts(std::uint64_t n, std::size_t nv, unsigned threads, Body body) {
    threads = unsigned(std::min<std::uint64_t>(threads, std::max<std::uint64_t>(1, n)));
    std::vector<std::vector<Counts>> part(threads, std::vector<Counts>(nv));
    std::vector<std::exception_ptr> errs(threads);
    auto run = [&](unsigned w) {
        const std::uint64_t a = n * w / threads, b = n * (w + 1) / threads;
        try {
            body(a, b, part[w]);
        } catch (...) {
            errs[w] = std::current_exception();
        }
    };
    if (threads == 1) {
        run(0);
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < threads; ++w) pool.emplace_back(run, w);
        for (auto& th : pool) th.join();
    }
    for (auto& e : errs)
        if (e) std::rethrow_exception(e);
    std::vector<Counts> total(nv);
    for (const auto& p : part)
        for (std::size_t v = 0; v < nv; ++v) {
            total[v].point += p[v].point;
            total[v].point0 += p[v].point0;
            total[v].sup += p[v].sup;
            total[v].inf += p[v].inf;
        }
    return total;
}

} // namespace

LevelCounts simulateLevel(const ProcessModel& m, double u, double t, std::uint64_t n, std::uint64_t rootSeed,
                          const SimulationSpec& spec, const std::vector<Variant>& variants) {
    if (!(u > 0.0) || !(t >= 0.0) || n == 0) throw PreconditionError("simulateLevel needs u > 0, t >= 0, n >= 1");
    if (variants.empty()) throw PreconditionError("no variants requested");
    if (t > 0.0 && spec.windowSteps == 0) throw PreconditionError("window needs windowSteps >= 1");
    const double c = m.c(), g = m.gamma();
    const double scale = std::pow(u / c, 1.0 / g);
    unsigned maxLevel = 0;
    double maxKappa = 0.0;
    for (const auto& v : variants) {
        if (!(v.kappa > 0.0)) throw PreconditionError("kappa must be positive");
        maxLevel = std::max(maxLevel, v.gridLevel);
        maxKappa = std::max(maxKappa, v.kappa);
    }
    LevelCounts lc;
    lc.u = u;
    lc.t = t;
    lc.n = n;
    lc.levelSeed = levelSeed(rootSeed, u);
    const std::size_t nv = variants.size();
    lc.variants.resize(nv);
    const unsigned threads = threadCount(spec);
    std::vector<Counts> total;

    if (m.kind() == ModelKind::StableLevy) {
        GridSpec gs;
        gs.windowEnd = t;
        gs.windowSteps = t > 0.0 ? spec.windowSteps : 0;
        gs.firstStep = scale * (spec.ratio - 1.0);
        gs.ratio = spec.ratio;
        gs.level = maxLevel;
        const TimeGrid grid = TimeGrid::build(gs, t + maxKappa * scale, maxLevel);
        const auto& tt = grid.times();
        struct Plan {
            std::vector<std::size_t> idx;
            std::vector<double> times;
            std::size_t evalCount;
            double horizon;
        };
        std::vector<Plan> plans(nv);
        for (std::size_t v = 0; v < nv; ++v) {
            Plan& p = plans[v];
            p.horizon = variants[v].kappa * scale;
            p.idx = grid.thin(maxLevel - variants[v].gridLevel, t + p.horizon);
            for (std::size_t i : p.idx) p.times.push_back(tt[i]);
            p.evalCount = t > 0.0 ? (std::size_t(spec.windowSteps) << variants[v].gridLevel) + 1 : 1;
            lc.variants[v].variant = variants[v];
            lc.variants[v].horizon = p.horizon;
            lc.variants[v].gridPoints = p.idx.size();
        }
        const double a = m.alpha(), s1 = stablePathScale(a);
        std::vector<double> inc(tt.size() - 1);
        for (std::size_t i = 0; i + 1 < tt.size(); ++i) inc[i] = s1 * std::pow(tt[i + 1] - tt[i], 1.0 / a);
        const auto coeffs = simd::StableCoeffs::make(a, m.beta());
        const auto& kernels = simd::active();
        total = parallelCounts(n, nv, threads, [&](std::uint64_t first, std::uint64_t last, std::vector<Counts>& out) {
            std::vector<double> z(inc.size()), x(tt.size()), xs, Y;
            for (std::uint64_t j = first; j < last; ++j) {
                stableUnitVariates(coeffs, deriveSeed(lc.levelSeed, j), z.size(), z.data(), kernels);
                x[0] = 0.0;
                for (std::size_t i = 0; i < z.size(); ++i) x[i + 1] = x[i] + inc[i] * z[i];
                for (std::size_t v = 0; v < nv; ++v) {
                    const Plan& p = plans[v];
                    xs.resize(p.idx.size());
                    for (std::size_t i = 0; i < p.idx.size(); ++i) xs[i] = x[p.idx[i]];
                    Y.resize(p.evalCount);
                    storageOnGrid(xs.data(), p.times.data(), xs.size(), p.evalCount, c, g, p.horizon, Y.data());
                    tally(Y, p.evalCount, u, out[v]);
                }
            }
        });
    } else {
        const AdditivePathGenerator gen(m, t + maxKappa * scale, spec.epsilonFactor * u, spec.maxExpectedJumps);
        std::vector<std::vector<double>> evalTimes(nv);
        for (std::size_t v = 0; v < nv; ++v) {
            const double h = variants[v].kappa * scale;
            if (t > 0.0) {
                const std::size_t steps = std::size_t(spec.windowSteps) << variants[v].gridLevel;
                for (std::size_t i = 0; i <= steps; ++i) evalTimes[v].push_back(t * double(i) / double(steps));
            } else {
                evalTimes[v].push_back(0.0);
            }
            lc.variants[v].variant = variants[v];
            lc.variants[v].horizon = h;
        }
        total = parallelCounts(n, nv, threads, [&](std::uint64_t first, std::uint64_t last, std::vector<Counts>& out) {
            for (std::uint64_t j = first; j < last; ++j) {
                try {
                    const SamplePath path = gen.sample(deriveSeed(lc.levelSeed, j));
                    for (std::size_t v = 0; v < nv; ++v) {
                        const auto st = storageValues(path, c, g, evalTimes[v], lc.variants[v].horizon);
                        tally(st.Y, st.Y.size(), u, out[v]);
                    }
                } catch (const Error& e) {
                    rethrowAt(e, j);
                }
            }
        });
        for (auto& vc : lc.variants) vc.gridPoints = 0;
    }
    for (std::size_t v = 0; v < nv; ++v) {
        lc.variants[v].point = total[v].point;
        lc.variants[v].point0 = total[v].point0;
        lc.variants[v].sup = total[v].sup;
        lc.variants[v].inf = total[v].inf;
        if (!(lc.variants[v].sup >= lc.variants[v].point && lc.variants[v].point >= lc.variants[v].inf))
            throw InvariantError("paired counts violate sup >= point >= inf");
    }
    return lc;
}

OverloadEstimate makeEstimate(OverloadKind kind, const LevelCounts& lc, std::size_t vi, std::uint64_t rootSeed) {
    const VariantCounts& vc = lc.variants.at(vi);
    OverloadEstimate e;
    e.kind = kind;
    e.u = lc.u;
    e.t = lc.t;
    e.trials = lc.n;
    e.hits = kind == OverloadKind::Point ? vc.point : (kind == OverloadKind::WindowSup ? vc.sup : vc.inf);
    e.p = double(e.hits) / double(e.trials);
    e.ci = wilson(e.hits, e.trials);
    e.horizon = vc.horizon;
    e.kappa = vc.variant.kappa;
    e.gridLevel = vc.variant.gridLevel;
    e.gridPoints = vc.gridPoints;
    e.rootSeed = rootSeed;
    return e;
}

OverloadEstimate estimateOverload(const ProcessModel& m, OverloadKind kind, double u, double t, std::uint64_t n,
                                  const SimulationSpec& spec, std::uint64_t rootSeed) {
    const auto lc = simulateLevel(m, u, t, n, rootSeed, spec, {Variant{spec.kappa, spec.gridLevel}});
    return makeEstimate(kind, lc, 0, rootSeed);
}

RatioEstimate pairedRatio(std::uint64_t kA, std::uint64_t kB, std::uint64_t kAB, std::uint64_t n, double z) {
    RatioEstimate r;
    if (kB == 0 || kA == 0 || n == 0) return r;
    const double nn = double(n), pA = kA / nn, pB = kB / nn, pAB = kAB / nn;
    const double var = ((1.0 - pA) / pA + (1.0 - pB) / pB - 2.0 * (pAB - pA * pB) / (pA * pB)) / nn;
    const double se = std::sqrt(std::max(0.0, var));
    r.value = pA / pB;
    r.ci = {*r.value * std::exp(-z * se), *r.value * std::exp(z * se)};
    r.stderr_ = *r.value * se;
    return r;
}

double WindowRule::at(double u, double gamma) const {
    if (kind == Kind::Constant) return t;
    return c0 * std::pow(u, 1.0 / gamma - delta);
}

PiterbargReport piterbargFromCounts(const ProcessModel& m, const std::vector<LevelCounts>& levels, std::size_t vi) {
    PiterbargReport rep;
    for (const auto& lc : levels) {
        const VariantCounts& vc = lc.variants.at(vi);
        PiterbargRow row;
        row.u = lc.u;
        row.t = lc.t;
        row.n = lc.n;
        row.kPoint = vc.point;
        row.kSup = vc.sup;
        row.kInf = vc.inf;
        row.pPoint = double(vc.point) / double(lc.n);
        row.pSup = double(vc.sup) / double(lc.n);
        row.pInf = double(vc.inf) / double(lc.n);
        row.ratioSup = pairedRatio(vc.sup, vc.point, vc.point, lc.n);
        row.ratioStrong = pairedRatio(vc.sup, vc.inf, vc.inf, lc.n);
        rep.rows.push_back(row);
    }
    rep.ratioSupNonincreasing = true;
    for (std::size_t i = 1; i < rep.rows.size(); ++i) {
        const auto& a = rep.rows[i - 1].ratioSup;
        const auto& b = rep.rows[i].ratioSup;
        if (!a.value || !b.value) {
            rep.ratioSupNonincreasing = false;
            continue;
        }
        const double tol = kZ95 * std::hypot(a.stderr_, b.stderr_);
        if (*b.value - *a.value > tol) rep.ratioSupNonincreasing = false;
    }
    try {
        rep.regime = regimeClassifier(m);
    } catch (const PreconditionError& e) {
        rep.regime.verdict = RegimeOutcome::Rejected;
        rep.regime.statement = e.what();
    }
    return rep;
}

PiterbargReport piterbargExperiment(const ProcessModel& m, const std::vector<double>& uList, const WindowRule& rule,
                                    std::uint64_t n, std::uint64_t rootSeed, const SimulationSpec& spec) {
    if (uList.empty()) throw PreconditionError("uList is empty");
    for (std::size_t i = 1; i < uList.size(); ++i)
        if (!(uList[i] > uList[i - 1])) throw PreconditionError("uList must be increasing");
    std::vector<LevelCounts> levels;
    const RegimeVerdict pre = [&] {
        try {
            return regimeClassifier(m);
        } catch (const PreconditionError&) {
            return RegimeVerdict{};
        }
    }();
    std::optional<SurrogateCheck> sur;
    if (pre.verdict == RegimeOutcome::PiterbargAbsent) {
        // plain MC cannot reach the levels where absence shows
        SurrogateCheck s;
        s.u = 1e6;
        s.t = rule.at(s.u, m.gamma());
        s.ratio = rShiftedNumeric(m, s.t, s.u).ratio;
        s.predicted = piterbargLimitRatio(m, s.t);
        s.absent = s.ratio > 2.0;
        s.note = "Monte Carlo at the levels where absence shows is infeasible; quadrature surrogate R_t(u)/R(u) used";
        sur = s;
    }
    for (double u : uList) {
        const double t = rule.at(u, m.gamma());
        levels.push_back(simulateLevel(m, u, t, n, rootSeed, spec, {Variant{spec.kappa, spec.gridLevel}}));
    }
    PiterbargReport rep = piterbargFromCounts(m, levels, 0);
    rep.surrogate = sur;
    return rep;
}

SlopeFit tailSlopeFit(const std::vector<OverloadEstimate>& est) {
    std::vector<double> x, y, w;
    for (const auto& e : est) {
        if (!(e.p > 0.0)) continue;
        const double lo = std::max(e.ci.lo, 1e-300), hi = std::max(e.ci.hi, lo * (1 + 1e-12));
        const double s = std::max((std::log(hi) - std::log(lo)) / (2.0 * kZ95), 1e-12);
        x.push_back(std::log(e.u));
        y.push_back(std::log(e.p));
        w.push_back(1.0 / (s * s));
    }
    if (x.size() < 3) throw PreconditionError("tailSlopeFit needs at least 3 estimates with p > 0");
    SlopeFit f;
    // linear weighted least squares
    double W = 0, Sx = 0, Sy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        W += w[i];
        Sx += w[i] * x[i];
        Sy += w[i] * y[i];
    }
    const double mx = Sx / W, my = Sy / W;
    double Sxx = 0, Sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        Sxx += w[i] * (x[i] - mx) * (x[i] - mx);
        Sxy += w[i] * (x[i] - mx) * (y[i] - my);
    }
    if (!(Sxx > 0.0)) throw PreconditionError("tailSlopeFit needs distinct levels");
    f.slope = Sxy / Sxx;
    f.intercept = my - f.slope * mx;
    f.stderr_ = std::sqrt(1.0 / Sxx);
    // quadratic term on centred log u: normal equations, 3x3
    double M[3][4] = {};
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - mx, b[3] = {1.0, d, d * d};
        for (int r = 0; r < 3; ++r) {
            for (int c = 0; c < 3; ++c) M[r][c] += w[i] * b[r] * b[c];
            M[r][3] += w[i] * b[r] * y[i];
        }
    }
    // invert via Gauss-Jordan on [M | I] for the variance of the quadratic coefficient
    double A[3][6];
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 6; ++c) A[r][c] = c < 3 ? M[r][c] : (c - 3 == r ? 1.0 : 0.0);
    bool ok = true;
    for (int col = 0; col < 3 && ok; ++col) {
        int piv = col;
        for (int r = col + 1; r < 3; ++r)
            if (std::fabs(A[r][col]) > std::fabs(A[piv][col])) piv = r;
        if (std::fabs(A[piv][col]) < 1e-300) {
            ok = false;
            break;
        }
        std::swap(A[piv], A[col]);
        const double d = A[col][col];
        for (double& v : A[col]) v /= d;
        for (int r = 0; r < 3; ++r)
            if (r != col) {
                const double fct = A[r][col];
                for (int c = 0; c < 6; ++c) A[r][c] -= fct * A[col][c];
            }
    }
    if (ok) {
        double coef[3];
        for (int r = 0; r < 3; ++r) coef[r] = A[r][3] * M[0][3] + A[r][4] * M[1][3] + A[r][5] * M[2][3];
        f.curvature = coef[2];
        f.curvatureStderr = std::sqrt(std::max(0.0, A[2][5]));
        f.powerLaw = !(f.curvature < 0.0 && -f.curvature > 3.0 * f.curvatureStderr);
    }
    return f;
}

} // namespace ovl
