#pragma once

#include "ovl/quadrature.hpp"
#include "ovl/tailkit.hpp"

#include <complex>
#include <optional>
#include <string>
#include <vector>

namespace ovl {

enum class ModelKind { StableLevy, SelfSimilarAdditive };

// Input process X plus the service curve c s^gamma. Construction validates
// everything; an existing model is always usable.
class ProcessModel {
public:
    static ProcessModel stable(double alpha, double beta, double c, double gamma);
    // rMinus defaults to the zero tail (no negative jumps).
    static ProcessModel additive(double H, TailFunction rPlus, std::optional<TailFunction> rMinus, double c,
                                 double gamma);

    ModelKind kind() const { return kind_; }
    double H() const { return H_; }
    double c() const { return c_; }
    double gamma() const { return gamma_; }
    double alpha() const { return alpha_; }
    double beta() const { return beta_; }
    const TailFunction& rPlus() const { return *rPlus_; }
    const TailFunction& rMinus() const { return *rMinus_; }

    // Tail of the Levy measure of X(1) on the positive side, x > 0.
    double logJumpTail(double x) const;
    bool nonnegativeJumps() const;

private:
    ProcessModel() = default;
    ModelKind kind_ = ModelKind::StableLevy;
    double H_ = 0.5, c_ = 1.0, gamma_ = 1.0, alpha_ = 2.0, beta_ = 0.0;
    std::optional<TailFunction> rPlus_, rMinus_;
};

// Stable normalization constant C_alpha = 1/(Gamma(1-alpha) cos(pi alpha/2)); 2/pi at alpha = 1.
double stableConstant(double alpha);
// Scale of the strictly stable X(1) whose Levy tail is ((1+beta)/2) x^-alpha.
double stablePathScale(double alpha);

// sigma_+(s) = (1 + c s^gamma) s^-H; sigma_- is identically +infinity.
struct SigmaProfile {
    double H = 0.5, c = 1.0, gamma = 1.0;
    double sHat = 1.0;       // unique minimizer
    double sigmaMin = 2.0;   // sigma_+(sHat)
    double curvature = 0.5;  // sigma_+''(sHat)

    double plus(double s) const;
    double logPlus(double s) const;
};

SigmaProfile sigmaProfile(const ProcessModel& m);

struct RValue {
    double value = 0.0;     // min(1, raw)
    double raw = 0.0;       // uncapped quadrature value (0 if it underflows)
    double logRaw = 0.0;    // log of the uncapped value, finite even when raw underflows
    double quadError = 0.0; // absolute error estimate on raw
    double relError = 0.0;  // relative, meaningful even when raw underflows
};

// Exact-tail quadrature of H int [r+(sigma+(s)u) + r-(sigma-(s)u)] ds/s.
RValue rNumeric(const ProcessModel& m, double u, const QuadOptions& opt = {});
RValue rStableClosed(const ProcessModel& m, double u);

struct RvConstant {
    double C = 0.0;
    double quadError = 0.0;
};

// R(u) ~ C r+(u) for power-law tails.
RvConstant rAsymptoticRV(const ProcessModel& m);

struct LaplaceValue {
    double value = 0.0;
    double logValue = 0.0;
    double prefactor = 0.0;  // everything except u^(rhoG - alphaW/2) exp(-A sigma^alphaW u^alphaW)
};

LaplaceValue rLaplace(const ProcessModel& m, double u);

struct ShiftedValue {
    double logRt = 0.0;
    double logR = 0.0;
    double ratio = 0.0;  // R_t(u)/R(u)
    double quadError = 0.0;  // relative
};

ShiftedValue rShiftedNumeric(const ProcessModel& m, double t, double u, const QuadOptions& opt = {});
double piterbargLimitRatio(const ProcessModel& m, double t);

enum class RegimeOutcome { PiterbargHolds, PiterbargAbsent, Unresolved, AllGammaHold, Rejected };
const char* regimeName(RegimeOutcome r);

struct RegimeVerdict {
    double gamma1 = 0.0;
    std::optional<double> gamma2, gamma3;
    RegimeOutcome verdict = RegimeOutcome::Unresolved;
    std::optional<double> windowExponent;  // t(u) = o(u^e) admissible
    std::string statement;
};

// Tails are read from rPlus: Weibull-type tails get the three thresholds,
// power tails (and stable inputs) hold for every gamma > H.
RegimeVerdict regimeClassifier(const ProcessModel& m);

struct RegimeRow {
    double H = 0.0, gamma = 0.0;
    RegimeVerdict verdict;
    bool boundary = false;
    std::string message;
};

struct RegimeSweep {
    std::string family;  // "weibull", "power" or "stable"
    double alphaW = 0.5;
    double rho = 2.0;
    std::vector<double> H, gamma;
};

std::vector<RegimeRow> emitRegimeTable(const RegimeSweep& sweep);

enum class CfRoute { Auto, ClosedForm, Quadrature };

struct CfValue {
    std::complex<double> value;
    double error = 0.0;
};

CfValue charFunction(const ProcessModel& m, double theta, double t, CfRoute route = CfRoute::Auto);

struct SelfSimReport {
    double maxDiscrepancy = 0.0;
    double maxQuadError = 0.0;
};

// max |E exp(i theta a^-h X(at)) - E exp(i theta X(t))| over the lists, with
// h the model's index unless scalingIndex is given. Both sides by quadrature.
SelfSimReport selfSimilarityCheck(const ProcessModel& m, double a, const std::vector<double>& thetas,
                                  const std::vector<double>& ts, std::optional<double> scalingIndex = {});

} // namespace ovl
