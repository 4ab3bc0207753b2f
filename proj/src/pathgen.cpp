#include "ovl/pathgen.hpp"

#include "ovl/errors.hpp"
#include "ovl/rng.hpp"

#include <algorithm>
#include <cmath>

namespace ovl {

// ---------------------------------------------------------------- grids

TimeGrid TimeGrid::build(const GridSpec& spec, double end, unsigned spareLevels) {
    if (!(spec.ratio > 1.0) || !(spec.firstStep > 0.0)) throw PreconditionError("grid needs ratio > 1 and firstStep > 0");
    if (!(end > 0.0) || !(spec.windowEnd >= 0.0)) throw PreconditionError("grid needs end > 0 and windowEnd >= 0");
    if (spec.windowEnd > 0.0 && spec.windowSteps == 0) throw PreconditionError("window needs at least one step");
    TimeGrid g;
    g.spec_ = spec;
    const double scale = std::ldexp(1.0, int(spec.level));
    g.times_.push_back(0.0);
    if (spec.windowEnd > 0.0) {
        const std::size_t nw = std::size_t(spec.windowSteps) << spec.level;
        for (std::size_t i = 1; i <= nw; ++i) g.times_.push_back(spec.windowEnd * double(i) / double(nw));
    }
    g.windowCount_ = g.times_.size();
    const double A = spec.firstStep / (spec.ratio - 1.0);
    const double lr = std::log(spec.ratio) / scale;
    const std::size_t mult = std::size_t(1) << spareLevels;
    for (std::size_t k = 1;; ++k) {
        const double t = spec.windowEnd + A * std::expm1(double(k) * lr);
        if (!(t > g.times_.back())) throw NumericalError("geometric grid stalled");
        g.times_.push_back(t);
        if (t >= end && k % mult == 0) break;
        if (g.times_.size() > 50'000'000) throw BudgetError("time grid exceeds 5e7 points");
    }
    return g;
}

TimeGrid TimeGrid::uniform(double end, std::size_t steps) {
    if (!(end > 0.0) || steps == 0) throw PreconditionError("uniform grid needs end > 0 and steps > 0");
    TimeGrid g;
    g.spec_.windowEnd = end;
    g.spec_.windowSteps = unsigned(steps);
    for (std::size_t i = 0; i <= steps; ++i) g.times_.push_back(end * double(i) / double(steps));
    g.windowCount_ = g.times_.size();
    return g;
}

std::vector<std::size_t> TimeGrid::thin(unsigned down, double end) const {
    if (down > spec_.level) throw PreconditionError("cannot thin below level 0");
    const std::size_t d = std::size_t(1) << down;
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < windowCount_; i += d) {
        idx.push_back(i);
        if (times_[i] >= end) return idx;
    }
    for (std::size_t i = windowCount_ - 1 + d; i < times_.size(); i += d) {
        idx.push_back(i);
        if (times_[i] >= end) return idx;
    }
    throw PreconditionError("grid does not reach the requested end at the coarser level");
}

// ---------------------------------------------------------------- paths

double pathValue(const SamplePath& p, double t) {
    if (p.times.empty() || t < 0.0 || t > p.times.back()) throw PreconditionError("time outside the path extent");
    const std::size_t i = std::size_t(std::upper_bound(p.times.begin(), p.times.end(), t) - p.times.begin()) - 1;
    if (p.drift) return p.values[i] - (*p.drift)(p.times[i]) + (*p.drift)(t);
    if (std::fabs(p.times[i] - t) > 1e-12 * std::max(1.0, t)) throw PreconditionError("time is not a grid time of the path");
    return p.values[i];
}

// ---------------------------------------------------------------- stable

void stableUnitVariates(const simd::StableCoeffs& k, std::uint64_t seed, std::size_t n, double* out,
                        const simd::KernelTable& kernels) {
    CounterStream s(seed);
    constexpr std::size_t block = 512;
    double u1[block], u2[block];
    for (std::size_t i0 = 0; i0 < n; i0 += block) {
        const std::size_t m = std::min(block, n - i0);
        for (std::size_t j = 0; j < m; ++j) {
            u1[j] = CounterStream::toUniform(s.at(2 * (i0 + j)));
            u2[j] = CounterStream::toUniform(s.at(2 * (i0 + j) + 1));
        }
        kernels.stableTransform(u1, u2, m, k, out + i0);
    }
}

namespace {

void checkStable(double alpha, double beta) {
    if (!(alpha > 0.0 && alpha <= 2.0)) throw PreconditionError("stable alpha must lie in (0,2]");
    if (!(beta >= -1.0 && beta <= 1.0)) throw PreconditionError("stable beta must lie in [-1,1]");
    if (alpha == 1.0 && beta != 0.0) throw PreconditionError("alpha = 1 with beta != 0 is not supported");
}

} // namespace

std::vector<double> sampleStable(double alpha, double beta, double scale, std::size_t n, std::uint64_t seed) {
    checkStable(alpha, beta);
    if (!(scale > 0.0)) throw PreconditionError("stable scale must be positive");
    std::vector<double> out(n);
    stableUnitVariates(simd::StableCoeffs::make(alpha, beta), seed, n, out.data(), simd::active());
    for (double& x : out) x *= scale;
    return out;
}

SamplePath stableLevyPath(const ProcessModel& m, const TimeGrid& grid, std::uint64_t seed) {
    if (m.kind() != ModelKind::StableLevy) throw PreconditionError("stableLevyPath needs a stable model");
    const auto& t = grid.times();
    if (t.size() < 2) throw PreconditionError("grid needs at least two points");
    const double a = m.alpha(), s1 = stablePathScale(a);
    SamplePath p;
    p.seed = seed;
    p.times = t;
    p.values.assign(t.size(), 0.0);
    std::vector<double> z(t.size() - 1);
    stableUnitVariates(simd::StableCoeffs::make(a, m.beta()), seed, z.size(), z.data(), simd::active());
    for (std::size_t i = 1; i < t.size(); ++i)
        p.values[i] = p.values[i - 1] + s1 * std::pow(t[i] - t[i - 1], 1.0 / a) * z[i - 1];
    p.monotone = m.beta() == 1.0 && a < 1.0;
    return p;
}

// ---------------------------------------------------------------- additive

double DriftCurve::operator()(double t) const {
    if (!(t > 0.0)) return 0.0;
    const double th = std::pow(t, H_);
    return th * r_.integral(eps_ / th);
}

double DriftCurve::derivative(double t) const {
    if (!(t > 0.0)) return std::numeric_limits<double>::infinity();
    const double th = std::pow(t, H_);
    const double a = eps_ / th;
    return H_ * th / t * (r_.integral(a) - a * r_(a));
}

namespace {

const TailFunction& requireOneSided(const ProcessModel& m, const char* op) {
    if (m.kind() != ModelKind::SelfSimilarAdditive)
        throw PreconditionError(std::string(op) + " needs a self-similar additive model");
    if (!m.nonnegativeJumps())
        throw PreconditionError(std::string(op) + ": two-sided additive models are not supported (negative tail must be zero)");
    return m.rPlus();
}

} // namespace

AdditivePathGenerator::AdditivePathGenerator(const ProcessModel& m, double T, double epsilon, double maxExpectedJumps)
    : H_(m.H()), T_(T), eps_(epsilon), r_(requireOneSided(m, "additiveSSPath")) {
    if (!(T > 0.0) || !(epsilon > 0.0)) throw PreconditionError("additive paths need T > 0 and epsilon > 0");
    y0_ = std::log(epsilon) - H_ * std::log(T);
    drift_ = std::make_shared<DriftCurve>(r_, H_, eps_);

    // mass of r(e^y) dy cell by cell until the remainder is negligible
    auto f = [&](double y) { return r_(std::exp(y)); };
    QuadOptions q;
    q.relTol = 1e-12;
    cum_.push_back(0.0);
    logr_.push_back(r_.logEval(std::exp(y0_)));
    const std::size_t maxCells = 400000;
    int quiet = 0;
    for (std::size_t k = 0;; ++k) {
        if (k == maxCells) throw NumericalError("jump intensity does not integrate: Lambda(eps, T) diverges", cum_.back());
        const double a = y0_ + double(k) * dy_, b = a + dy_;
        if (b > 700.0) throw NumericalError("jump intensity does not integrate: Lambda(eps, T) diverges", cum_.back());
        const double mass = adaptiveGK(f, a, b, q).value;
        cum_.push_back(cum_.back() + mass);
        logr_.push_back(r_.logEval(std::exp(b)));
        if (cum_.back() > maxExpectedJumps)
            throw BudgetError("expected jump count exceeds the budget of " + std::to_string(maxExpectedJumps) +
                              "; raise epsilon");
        if (mass <= 1e-17 * cum_.back()) {
            if (++quiet >= 64) break;
        } else {
            quiet = 0;
        }
    }
    lambda_ = cum_.back();
    info_.epsilon = eps_;
    info_.expectedJumps = lambda_;
    info_.drift = (*drift_)(T_);
    const double v0 = std::exp(y0_);
    auto wr = [&](double w) { return w * r_(w); };
    info_.discardedVariance = std::pow(T_, 2.0 * H_) * adaptiveGK(wr, 0.0, v0, q).value;
}

double AdditivePathGenerator::sampleV(double U) const {
    const double target = U * lambda_;
    auto it = std::upper_bound(cum_.begin(), cum_.end(), target);
    std::size_t k = std::size_t(it - cum_.begin());
    k = std::clamp<std::size_t>(k, 1, cum_.size() - 1) - 1;
    const double mass = cum_[k + 1] - cum_[k];
    const double q = mass > 0.0 ? std::clamp((target - cum_[k]) / mass, 0.0, 1.0) : 0.5;
    // r(e^y) taken exponential across the cell
    const double b = (logr_[k + 1] - logr_[k]) / dy_;
    double x;
    if (!std::isfinite(b) || std::fabs(b * dy_) < 1e-12)
        x = q * dy_;
    else
        x = std::log1p(q * std::expm1(b * dy_)) / b;
    return std::exp(y0_ + double(k) * dy_ + x);
}

SamplePath AdditivePathGenerator::sample(std::uint64_t seed) const {
    CounterStream s(seed);
    const std::uint64_t n = lambda_ > 0.0 ? s.poisson(lambda_) : 0;
    std::vector<std::pair<double, double>> jumps;
    jumps.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i) {
        const double v = sampleV(s.uniform());
        const double time = std::pow(eps_ / v, 1.0 / H_);
        const double z = r_.inverse(s.uniform() * r_(v));
        jumps.emplace_back(std::min(time, T_), eps_ * std::max(z, v) / v);
    }
    std::sort(jumps.begin(), jumps.end());
    SamplePath p;
    p.seed = seed;
    p.monotone = true;
    p.truncation = info_;
    p.drift = drift_;
    p.times.push_back(0.0);
    p.values.push_back(0.0);
    double level = 0.0;
    for (const auto& [time, x] : jumps) {
        level += x;
        if (time > p.times.back()) {
            p.times.push_back(time);
            p.values.push_back(level + (*drift_)(time));
        } else {
            p.values.back() = level + (*drift_)(p.times.back());  // coincident jump times
        }
    }
    if (T_ > p.times.back()) {
        p.times.push_back(T_);
        p.values.push_back(level + (*drift_)(T_));
    }
    return p;
}

SamplePath additiveSSPath(const ProcessModel& m, double T, double epsilon, std::uint64_t seed) {
    return AdditivePathGenerator(m, T, epsilon).sample(seed);
}

double truncationBound(const ProcessModel& m, double epsilon, double T) {
    const TailFunction& r = requireOneSided(m, "truncationBound");
    if (!(epsilon >= 0.0) || !(T >= 0.0)) throw PreconditionError("truncationBound needs epsilon >= 0 and T >= 0");
    if (epsilon == 0.0) return 0.0;
    return DriftCurve(r, m.H(), epsilon)(T);
}

} // namespace ovl
