#pragma once

#include "ovl/model.hpp"
#include "ovl/simd.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

namespace ovl {

// Uniform steps on the window [0, windowEnd], then geometric steps
// windowEnd + A (rho^k - 1) until the end is covered. Level L halves the
// window step and takes rho^(1/2^L), so every level-L grid contains the
// level-(L-1) grid as an exact subset.
struct GridSpec {
    double windowEnd = 0.0;
    unsigned windowSteps = 0;
    double firstStep = 1.0;  // A (rho - 1) at level 0
    double ratio = 1.0 + 1.0 / 64.0;
    unsigned level = 0;
};

class TimeGrid {
public:
    TimeGrid() = default;
    // Covers [0, end]; the geometric part gets a multiple of 2^spareLevels
    // steps so coarser levels can be thinned out of it exactly.
    static TimeGrid build(const GridSpec& spec, double end, unsigned spareLevels = 0);
    static TimeGrid uniform(double end, std::size_t steps);

    const std::vector<double>& times() const { return times_; }
    std::size_t size() const { return times_.size(); }
    const GridSpec& spec() const { return spec_; }
    std::size_t windowCount() const { return windowCount_; }  // points on [0, windowEnd]

    // Indices of the level-(spec.level - down) grid inside this one, up to and
    // including the first point at or beyond `end`.
    std::vector<std::size_t> thin(unsigned down, double end) const;

private:
    GridSpec spec_;
    std::vector<double> times_;
    std::size_t windowCount_ = 0;
};

struct TruncationInfo {
    double epsilon = 0.0;
    double drift = 0.0;               // D(eps, T), mean of the discarded jumps
    double discardedVariance = 0.0;
    double expectedJumps = 0.0;
};

// Continuous part t^H G(eps t^-H) of a truncated additive path, G(a) = int_0^a r.
class DriftCurve {
public:
    DriftCurve(TailFunction r, double H, double epsilon) : r_(std::move(r)), H_(H), eps_(epsilon) {}
    double operator()(double t) const;
    double derivative(double t) const;

private:
    TailFunction r_;
    double H_, eps_;
};

struct SamplePath {
    std::vector<double> times;   // strictly increasing, starts at 0
    std::vector<double> values;  // X(times[i]), values[0] = 0
    bool monotone = false;
    std::uint64_t seed = 0;
    std::optional<TruncationInfo> truncation;
    // Jump paths: times are 0, the jump times and the end, values are right
    // limits, and drift gives the continuous part everywhere in between.
    std::shared_ptr<const DriftCurve> drift;
};

// X(t) for t inside the path extent (grid paths: t must be a grid time).
double pathValue(const SamplePath& p, double t);

// i.i.d. strictly stable variates, characteristic function
// exp(-scale^alpha |theta|^alpha (1 - i beta tan(pi alpha/2) sgn theta)).
std::vector<double> sampleStable(double alpha, double beta, double scale, std::size_t n, std::uint64_t seed);

// Fills out with unit-scale variates; stream position 2i, 2i+1 feed variate i.
void stableUnitVariates(const simd::StableCoeffs& k, std::uint64_t seed, std::size_t n, double* out,
                        const simd::KernelTable& kernels);

SamplePath stableLevyPath(const ProcessModel& m, const TimeGrid& grid, std::uint64_t seed);

class AdditivePathGenerator {
public:
    // Jumps of physical size above epsilon on (0, T]; maxExpectedJumps caps Lambda.
    AdditivePathGenerator(const ProcessModel& m, double T, double epsilon, double maxExpectedJumps = 1e7);

    double expectedJumps() const { return lambda_; }
    const TruncationInfo& truncation() const { return info_; }
    double horizon() const { return T_; }
    SamplePath sample(std::uint64_t seed) const;

private:
    double sampleV(double U) const;

    double H_, T_, eps_, lambda_ = 0.0;
    TailFunction r_;
    TruncationInfo info_;
    std::shared_ptr<const DriftCurve> drift_;
    // cumulative mass of r(e^y) dy on y_k = y0 + k dy
    double y0_ = 0.0, dy_ = 1.0 / 64.0;
    std::vector<double> cum_, logr_;
};

SamplePath additiveSSPath(const ProcessModel& m, double T, double epsilon, std::uint64_t seed);

// D(eps, T): expected total of the jumps below eps on (0, T].
double truncationBound(const ProcessModel& m, double epsilon, double T);

} // namespace ovl
