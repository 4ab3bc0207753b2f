#pragma once

#include "ovl/model.hpp"
#include "ovl/storage.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace ovl {

enum class OverloadKind { Point, WindowSup, WindowInf };
const char* overloadKindName(OverloadKind k);

struct Interval {
    double lo = 0.0, hi = 0.0;
};

inline constexpr double kZ95 = 1.959963984540054;

Interval wilson(std::uint64_t k, std::uint64_t n, double z = kZ95);

// Simulation knobs shared by all experiments.
struct SimulationSpec {
    double kappa = kCalibratedKappa;
    double ratio = 1.0 + 1.0 / 256.0;  // geometric growth per grid step, s_k = t + scale (ratio^k - 1)
    unsigned windowSteps = 64;         // uniform steps on [0, t]
    unsigned gridLevel = 0;            // each level halves every step
    double epsilonFactor = 1e-3;       // additive inputs: jump floor eps = factor * u
    double maxExpectedJumps = 1e7;
    unsigned threads = 0;              // 0: OVL_THREADS or the hardware count
};

// One horizon/resolution combination evaluated on the shared paths.
struct Variant {
    double kappa = kCalibratedKappa;
    unsigned gridLevel = 0;
};

struct VariantCounts {
    Variant variant;
    double horizon = 0.0;
    std::size_t gridPoints = 0;
    std::uint64_t point = 0;   // Y(t) > u
    std::uint64_t point0 = 0;  // Y(0) > u
    std::uint64_t sup = 0;     // max over the window of Y > u
    std::uint64_t inf = 0;     // min over the window of Y > u
};

struct LevelCounts {
    double u = 0.0, t = 0.0;
    std::uint64_t n = 0;
    std::uint64_t levelSeed = 0;
    std::vector<VariantCounts> variants;
};

// n paths for level u and window [0, t], simulated once at the finest
// requested resolution and longest horizon and then evaluated per variant.
// Counts are identical for any thread count.
LevelCounts simulateLevel(const ProcessModel& m, double u, double t, std::uint64_t n, std::uint64_t rootSeed,
                          const SimulationSpec& spec, const std::vector<Variant>& variants);

std::uint64_t levelSeed(std::uint64_t rootSeed, double u);

struct OverloadEstimate {
    OverloadKind kind = OverloadKind::Point;
    double u = 0.0, t = 0.0;
    std::uint64_t hits = 0, trials = 0;
    double p = 0.0;
    Interval ci;
    double horizon = 0.0, kappa = 0.0;
    unsigned gridLevel = 0;
    std::size_t gridPoints = 0;
    std::uint64_t rootSeed = 0;
};

OverloadEstimate makeEstimate(OverloadKind kind, const LevelCounts& lc, std::size_t variantIndex,
                              std::uint64_t rootSeed);

OverloadEstimate estimateOverload(const ProcessModel& m, OverloadKind kind, double u, double t, std::uint64_t n,
                                  const SimulationSpec& spec, std::uint64_t rootSeed);

// Ratio of paired proportions kA/kB with kAB joint hits; delta method on the log.
struct RatioEstimate {
    std::optional<double> value;
    Interval ci;
    double stderr_ = 0.0;
};

RatioEstimate pairedRatio(std::uint64_t kA, std::uint64_t kB, std::uint64_t kAB, std::uint64_t n, double z = kZ95);

struct WindowRule {
    enum class Kind { Constant, Power } kind = Kind::Constant;
    double t = 1.0;      // Constant
    double c0 = 1.0;     // Power: t(u) = c0 u^(1/gamma - delta)
    double delta = 0.0;
    double at(double u, double gamma) const;
};

struct PiterbargRow {
    double u = 0.0, t = 0.0;
    std::uint64_t n = 0, kPoint = 0, kSup = 0, kInf = 0;
    double pPoint = 0.0, pSup = 0.0, pInf = 0.0;
    RatioEstimate ratioSup, ratioStrong;
};

struct SurrogateCheck {
    double u = 0.0, t = 0.0;
    double ratio = 0.0;      // R_t(u)/R(u) by quadrature
    double predicted = 0.0;  // closed-form limit
    bool absent = false;
    std::string note;
};

struct PiterbargReport {
    std::vector<PiterbargRow> rows;
    bool ratioSupNonincreasing = false;  // within the paired CIs across consecutive u
    RegimeVerdict regime;
    std::optional<SurrogateCheck> surrogate;
};

PiterbargReport piterbargExperiment(const ProcessModel& m, const std::vector<double>& uList, const WindowRule& rule,
                                    std::uint64_t n, std::uint64_t rootSeed, const SimulationSpec& spec);
PiterbargReport piterbargFromCounts(const ProcessModel& m, const std::vector<LevelCounts>& levels,
                                    std::size_t variantIndex);

struct SlopeFit {
    double slope = 0.0, stderr_ = 0.0;
    double intercept = 0.0;
    double curvature = 0.0, curvatureStderr = 0.0;  // quadratic term of log p on log u
    bool powerLaw = true;  // false when the quadratic term is significantly negative
};

SlopeFit tailSlopeFit(const std::vector<OverloadEstimate>& estimates);

} // namespace ovl
