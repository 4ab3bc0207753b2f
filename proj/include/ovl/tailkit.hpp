#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace ovl {

// r(x) = K (1+x)^-rho
struct PowerForm {
    double K = 1.0;
    double rho = 1.0;
};

// r(x) = G x^rhoG exp(-A x^alphaW), held constant below the cap point so the
// tail is bounded and nonincreasing (cap at x=1 when rhoG<0, at the mode when
// rhoG>0, none when rhoG=0).
struct WeibullForm {
    double G = 1.0;
    double rhoG = 0.0;
    double A = 1.0;
    double alphaW = 0.5;
};

// r(x) = K / log(e+x)
struct LogForm {
    double K = 1.0;
};

enum class Extrapolation { Error, PowerLaw };

// Interpolated linearly in (log x, log r); a cell starting at x=0 is linear in
// (x, log r). All-zero values denote the identically zero tail.
struct TabulatedForm {
    std::vector<double> x;
    std::vector<double> r;
    Extrapolation extrapolation = Extrapolation::Error;
};

class TailFunction {
public:
    using Form = std::variant<PowerForm, WeibullForm, LogForm, TabulatedForm>;

    static TailFunction power(double K, double rho);
    static TailFunction weibull(double G, double rhoG, double A, double alphaW);
    static TailFunction logForm(double K);
    static TailFunction tabulated(std::vector<double> x, std::vector<double> r,
                                  Extrapolation ex = Extrapolation::Error);
    static TailFunction zero();

    explicit TailFunction(Form f);

    double operator()(double x) const { return eval(x); }
    double eval(double x) const;
    double logEval(double x) const;      // -inf for the zero tail
    double density(double x) const;      // -r'(x)
    double inverse(double y) const;      // sup{x >= 0 : r(x) >= y}
    double integral(double v) const;     // int_0^v r(x) dx
    double capPoint() const { return cap_; }

    bool isZero() const { return zero_; }
    std::string family() const;
    const Form& form() const { return form_; }

private:
    Form form_;
    double cap_ = 0.0;
    bool zero_ = false;
};

enum class ClassId { S, PD, OR, L, RV };
enum class Verdict { Pass, Fail, Inconclusive };

const char* className(ClassId c);
const char* verdictName(Verdict v);

struct ClassVerdict {
    ClassId classId = ClassId::PD;
    Verdict verdict = Verdict::Inconclusive;
    std::vector<std::pair<double, double>> ratioCurve;
    std::optional<double> estimatedIndex;
    std::vector<double> errorCurve;  // S only: per-point discretization estimate
    std::string diagnostics;
};

struct DiagnosticThresholds {
    double pd = 0.05;
    double orr = 0.05;
    double l = 0.02;
    double s = 0.05;
    double sFailBand = 0.25;      // |T-2| beyond this (net of mesh error) is a clear failure
    double meshTolerance = 0.01;  // discretization estimate above this makes S inconclusive
    double matuszewskaFloor = -50.0;
    double tailFraction = 0.25;
    double minDecades = 3.0;
};

std::vector<double> logGrid(double lo, double hi, std::size_t n);

// PD and OR use r(lambda u)/r(u); L uses r(u+lambda)/r(u); RV checks that the
// local log-log slope settles, reporting it as estimatedIndex.
ClassVerdict classDiagnostic(const TailFunction& tail, ClassId id, double lambda,
                             std::span<const double> uGrid, const DiagnosticThresholds& th = {});

struct TailIndex {
    double rvIndex = 0.0;
    double matuszewskaUpper = 0.0;  // -infinity when below the floor
};

TailIndex tailIndexEstimate(const TailFunction& tail, std::span<const double> uGrid,
                            const DiagnosticThresholds& th = {});

ClassVerdict subexpConvolutionDiagnostic(const TailFunction& tail, double uMax, std::size_t meshN,
                                         const DiagnosticThresholds& th = {},
                                         std::size_t curvePoints = 64);

} // namespace ovl
