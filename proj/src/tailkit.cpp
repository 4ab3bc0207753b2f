#include "ovl/tailkit.hpp"

#include "ovl/errors.hpp"
#include "ovl/quadrature.hpp"
#include "ovl/simd.hpp"

#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace ovl {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <class... Ts>
struct overloaded : Ts... { using Ts::operator()...; };
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double weibullCap(const WeibullForm& w) {
    if (w.rhoG < 0.0) return 1.0;
    if (w.rhoG > 0.0) return std::pow(w.rhoG / (w.A * w.alphaW), 1.0 / w.alphaW);
    return 0.0;
}

void checkTabulated(const TabulatedForm& t, bool& zero) {
    if (t.x.size() < 2 || t.x.size() != t.r.size())
        throw PreconditionError("tabulated tail needs at least two (x, r) pairs of equal length");
    for (std::size_t i = 0; i < t.x.size(); ++i) {
        if (!(t.x[i] >= 0.0) || !std::isfinite(t.x[i])) throw PreconditionError("tabulated x must be finite and >= 0");
        if (i && !(t.x[i] > t.x[i - 1])) throw PreconditionError("tabulated x must be strictly increasing");
    }
    zero = std::all_of(t.r.begin(), t.r.end(), [](double v) { return v == 0.0; });
    if (zero) return;
    for (std::size_t i = 0; i < t.r.size(); ++i) {
        if (!(t.r[i] > 0.0) || !std::isfinite(t.r[i])) throw PreconditionError("tabulated r must be strictly positive");
        if (i && t.r[i] > t.r[i - 1]) throw PreconditionError("tabulated r must be nonincreasing");
    }
}

// Interpolation cell of a tabulated tail containing x, or the extrapolation
// segment. Returns (logr, dlogr/dx).
struct TabPoint {
    double logr;
    double dlogdx;
};

TabPoint tabulatedAt(const TabulatedForm& t, double x) {
    const auto& X = t.x;
    const auto& R = t.r;
    const std::size_t n = X.size();
    auto cell = [&](std::size_t i, double q) -> TabPoint {
        const double l0 = std::log(R[i]), l1 = std::log(R[i + 1]);
        if (X[i] == 0.0) {
            const double s = (l1 - l0) / X[i + 1];
            return {l0 + s * q, s};
        }
        const double s = (l1 - l0) / (std::log(X[i + 1]) - std::log(X[i]));
        return {l0 + s * (std::log(q) - std::log(X[i])), q > 0.0 ? s / q : 0.0};
    };
    if (x < X.front()) {
        if (t.extrapolation == Extrapolation::Error)
            throw PreconditionError("tabulated tail queried below its grid (extrapolation disabled)");
        return {std::log(R.front()), 0.0};
    }
    if (x > X.back()) {
        if (t.extrapolation == Extrapolation::Error)
            throw PreconditionError("tabulated tail queried beyond its grid (extrapolation disabled)");
        return cell(n - 2, x);
    }
    std::size_t i = std::upper_bound(X.begin(), X.end(), x) - X.begin();
    i = std::min(std::max<std::size_t>(i, 1), n - 1) - 1;
    return cell(i, x);
}

} // namespace

TailFunction::TailFunction(Form f) : form_(std::move(f)) {
    std::visit(overloaded{
                   [&](const PowerForm& p) {
                       if (!(p.K > 0.0) || !(p.rho > 0.0)) throw PreconditionError("power tail needs K > 0 and rho > 0");
                   },
                   [&](const WeibullForm& w) {
                       if (!(w.G > 0.0) || !(w.A > 0.0)) throw PreconditionError("weibull tail needs G > 0 and A > 0");
                       if (!(w.alphaW > 0.0 && w.alphaW < 1.0))
                           throw PreconditionError("weibull exponent alphaW must lie strictly inside (0,1)");
                       if (!std::isfinite(w.rhoG)) throw PreconditionError("weibull rhoG must be finite");
                       cap_ = weibullCap(w);
                   },
                   [&](const LogForm& l) {
                       if (!(l.K > 0.0)) throw PreconditionError("log tail needs K > 0");
                   },
                   [&](const TabulatedForm& t) { checkTabulated(t, zero_); },
               },
               form_);
}

TailFunction TailFunction::power(double K, double rho) { return TailFunction(PowerForm{K, rho}); }
TailFunction TailFunction::weibull(double G, double rhoG, double A, double alphaW) {
    return TailFunction(WeibullForm{G, rhoG, A, alphaW});
}
TailFunction TailFunction::logForm(double K) { return TailFunction(LogForm{K}); }
TailFunction TailFunction::tabulated(std::vector<double> x, std::vector<double> r, Extrapolation ex) {
    return TailFunction(TabulatedForm{std::move(x), std::move(r), ex});
}
TailFunction TailFunction::zero() {
    return TailFunction(TabulatedForm{{0.0, 1.0}, {0.0, 0.0}, Extrapolation::PowerLaw});
}

std::string TailFunction::family() const {
    return std::visit(overloaded{[](const PowerForm&) { return std::string("power"); },
                                 [](const WeibullForm&) { return std::string("weibull"); },
                                 [](const LogForm&) { return std::string("log"); },
                                 [](const TabulatedForm&) { return std::string("tabulated"); }},
                      form_);
}

double TailFunction::logEval(double x) const {
    if (!(x >= 0.0)) throw PreconditionError("tail evaluated at a negative argument");
    if (zero_) return -kInf;
    return std::visit(overloaded{
                          [&](const PowerForm& p) { return std::log(p.K) - p.rho * std::log1p(x); },
                          [&](const WeibullForm& w) {
                              const double q = std::max(x, cap_);
                              if (q == 0.0) return std::log(w.G);  // rhoG == 0
                              return std::log(w.G) + w.rhoG * std::log(q) - w.A * std::pow(q, w.alphaW);
                          },
                          [&](const LogForm& l) { return std::log(l.K) - std::log(std::log(std::numbers::e + x)); },
                          [&](const TabulatedForm& t) { return tabulatedAt(t, x).logr; },
                      },
                      form_);
}

double TailFunction::eval(double x) const {
    if (zero_) {
        if (!(x >= 0.0)) throw PreconditionError("tail evaluated at a negative argument");
        return 0.0;
    }
    if (const auto* p = std::get_if<PowerForm>(&form_)) {
        if (!(x >= 0.0)) throw PreconditionError("tail evaluated at a negative argument");
        return p->K * std::pow(1.0 + x, -p->rho);
    }
    return std::exp(logEval(x));
}

double TailFunction::density(double x) const {
    if (zero_) return 0.0;
    return std::visit(overloaded{
                          [&](const PowerForm& p) { return p.K * p.rho * std::pow(1.0 + x, -p.rho - 1.0); },
                          [&](const WeibullForm& w) {
                              if (x <= cap_ || x == 0.0) return 0.0;
                              const double d = w.A * w.alphaW * std::pow(x, w.alphaW - 1.0) - w.rhoG / x;
                              return eval(x) * d;
                          },
                          [&](const LogForm& l) {
                              const double L = std::log(std::numbers::e + x);
                              return l.K / (L * L * (std::numbers::e + x));
                          },
                          [&](const TabulatedForm& t) {
                              const TabPoint p = tabulatedAt(t, x);
                              return -std::exp(p.logr) * p.dlogdx;
                          },
                      },
                      form_);
}

double TailFunction::inverse(double y) const {
    if (zero_) throw PreconditionError("inverse of the zero tail");
    if (!(y > 0.0)) throw PreconditionError("tail inverse needs y > 0");
    const double top = eval(0.0);
    if (y >= top) return 0.0;
    if (const auto* p = std::get_if<PowerForm>(&form_)) return std::pow(p->K / y, 1.0 / p->rho) - 1.0;
    if (const auto* l = std::get_if<LogForm>(&form_)) return std::exp(l->K / y) - std::numbers::e;
    if (const auto* w = std::get_if<WeibullForm>(&form_); w && w->rhoG == 0.0)
        return std::pow(std::log(w->G / y) / w->A, 1.0 / w->alphaW);
    // Generic: bracket in log x then TOMS 748 on log r(x) - log y.
    const double ly = std::log(y);
    double lo = std::max(capPoint(), 1e-300);
    if (logEval(lo) < ly) return lo;  // flat region above y only below lo
    double hi = std::max(2.0 * lo, 1.0);
    int guard = 0;
    while (logEval(hi) > ly) {
        hi *= 4.0;
        if (++guard > 600) throw NumericalError("tail inverse: could not bracket the level");
    }
    auto g = [&](double lx) { return logEval(std::exp(lx)) - ly; };
    boost::uintmax_t iters = 200;
    auto [a, b] = boost::math::tools::toms748_solve(g, std::log(lo), std::log(hi),
                                                    boost::math::tools::eps_tolerance<double>(52), iters);
    return std::exp(0.5 * (a + b));
}

double TailFunction::integral(double v) const {
    if (!(v >= 0.0)) throw PreconditionError("tail integral needs v >= 0");
    if (zero_ || v == 0.0) return 0.0;
    if (const auto* p = std::get_if<PowerForm>(&form_)) {
        if (p->rho == 1.0) return p->K * std::log1p(v);
        return p->K * std::expm1((1.0 - p->rho) * std::log1p(v)) / (1.0 - p->rho);
    }
    if (const auto* w = std::get_if<WeibullForm>(&form_)) {
        // flat below the cap, lower incomplete gamma above it
        const double sh = (w->rhoG + 1.0) / w->alphaW;
        if (sh > 0.0) {
            const double lo = std::min(v, cap_);
            double total = lo * eval(lo);
            if (v > cap_) {
                const double scale = w->G / w->alphaW * std::pow(w->A, -sh);
                total += scale * (boost::math::tgamma_lower(sh, w->A * std::pow(v, w->alphaW)) -
                                  boost::math::tgamma_lower(sh, w->A * std::pow(cap_, w->alphaW)));
            }
            return total;
        }
    }
    // [0, min(v,1)] linearly, the rest in log x.
    QuadOptions opt;
    opt.relTol = 1e-12;
    const double a = std::min(v, 1.0);
    double total = adaptiveGK([&](double x) { return eval(x); }, 0.0, a, opt).value;
    if (v > 1.0) {
        std::vector<double> br;
        const double lv = std::log(v);
        for (double q = 0.0; q < lv; q += 2.0) br.push_back(q);
        br.push_back(lv);
        total += integrateBreaks([&](double y) { const double x = std::exp(y); return eval(x) * x; }, br, opt).value;
    }
    return total;
}

const char* className(ClassId c) {
    switch (c) {
    case ClassId::S: return "S";
    case ClassId::PD: return "PD";
    case ClassId::OR: return "OR";
    case ClassId::L: return "L";
    default: return "RV";
    }
}

const char* verdictName(Verdict v) {
    switch (v) {
    case Verdict::Pass: return "pass";
    case Verdict::Fail: return "fail";
    default: return "inconclusive";
    }
}

std::vector<double> logGrid(double lo, double hi, std::size_t n) {
    if (!(lo > 0.0) || !(hi > lo) || n < 2) throw PreconditionError("logGrid needs 0 < lo < hi and n >= 2");
    std::vector<double> g(n);
    const double a = std::log(lo), b = std::log(hi);
    for (std::size_t i = 0; i < n; ++i) g[i] = std::exp(a + (b - a) * double(i) / double(n - 1));
    g.front() = lo;
    g.back() = hi;
    return g;
}

namespace {

bool gridUsable(std::span<const double> u, const DiagnosticThresholds& th, std::string& why) {
    if (u.size() < 8) {
        why = "grid has fewer than 8 points";
        return false;
    }
    for (std::size_t i = 1; i < u.size(); ++i)
        if (!(u[i] > u[i - 1])) throw PreconditionError("uGrid must be strictly increasing");
    if (!(u.front() > 0.0) || std::log10(u.back() / u.front()) < th.minDecades) {
        why = "grid spans fewer than the required decades";
        return false;
    }
    return true;
}

std::size_t tailStart(std::size_t n, double fraction) {
    const std::size_t k = std::max<std::size_t>(1, std::size_t(std::ceil(fraction * double(n))));
    return n - std::min(k, n);
}

double checkedLog(const TailFunction& t, double x) {
    const double l = t.logEval(x);
    if (!std::isfinite(l)) throw InvariantError("tail value is not strictly positive on the grid");
    return l;
}

} // namespace

ClassVerdict classDiagnostic(const TailFunction& tail, ClassId id, double lambda, std::span<const double> uGrid,
                             const DiagnosticThresholds& th) {
    ClassVerdict v;
    v.classId = id;
    if (id == ClassId::S) throw PreconditionError("class S is handled by subexpConvolutionDiagnostic");
    if (!(lambda > 0.0) || ((id == ClassId::PD || id == ClassId::OR) && !(lambda > 1.0)))
        throw PreconditionError("classDiagnostic needs lambda > 1 (shift > 0 for L)");
    std::string why;
    const bool usable = gridUsable(uGrid, th, why);
    for (double u : uGrid) {
        double ratio = 0.0;
        if (id == ClassId::L) ratio = std::exp(checkedLog(tail, u + lambda) - checkedLog(tail, u));
        else if (id == ClassId::RV) ratio = (checkedLog(tail, lambda * u) - checkedLog(tail, u)) / std::log(lambda);
        else ratio = std::exp(checkedLog(tail, lambda * u) - checkedLog(tail, u));
        v.ratioCurve.emplace_back(u, ratio);
    }
    if (!usable) {
        v.diagnostics = why;
        return v;
    }
    const std::size_t s = tailStart(v.ratioCurve.size(), th.tailFraction);
    double hi = -kInf, lo = kInf, dev = 0.0;
    for (std::size_t i = s; i < v.ratioCurve.size(); ++i) {
        const double r = v.ratioCurve[i].second;
        hi = std::max(hi, r);
        lo = std::min(lo, r);
        dev = std::max(dev, std::fabs(r - 1.0));
    }
    std::ostringstream d;
    switch (id) {
    case ClassId::PD:
        v.verdict = hi <= 1.0 - th.pd ? Verdict::Pass : Verdict::Fail;
        d << "tail-end sup " << hi << " vs " << 1.0 - th.pd;
        break;
    case ClassId::OR:
        v.verdict = lo >= th.orr ? Verdict::Pass : Verdict::Fail;
        d << "tail-end inf " << lo << " vs " << th.orr;
        break;
    case ClassId::L:
        v.verdict = dev <= th.l ? Verdict::Pass : Verdict::Fail;
        d << "tail-end max |ratio-1| " << dev << " vs " << th.l;
        break;
    default:
        // local index settles: spread of the tail-end slopes within delta_L
        v.estimatedIndex = v.ratioCurve.back().second;
        v.verdict = (hi - lo) <= th.l ? Verdict::Pass : Verdict::Fail;
        d << "tail-end local index range [" << lo << ", " << hi << "]";
        break;
    }
    if (const auto* w = std::get_if<WeibullForm>(&tail.form()); w && tail.capPoint() > 0.0)
        d << "; capped below x=" << tail.capPoint();
    v.diagnostics = d.str();
    return v;
}

TailIndex tailIndexEstimate(const TailFunction& tail, std::span<const double> uGrid, const DiagnosticThresholds& th) {
    std::string why;
    if (!gridUsable(uGrid, th, why)) throw PreconditionError("tailIndexEstimate: " + why);
    const std::size_t n = uGrid.size();
    const std::size_t s = n / 2;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double m = double(n - s);
    for (std::size_t i = s; i < n; ++i) {
        const double x = std::log(uGrid[i]), y = checkedLog(tail, uGrid[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    TailIndex out;
    out.rvIndex = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    double best = -kInf;
    for (std::size_t i = tailStart(n, th.tailFraction); i < n; ++i)
        for (double lam : {2.0, 4.0, 8.0})
            best = std::max(best, (checkedLog(tail, lam * uGrid[i]) - checkedLog(tail, uGrid[i])) / std::log(lam));
    out.matuszewskaUpper = best < th.matuszewskaFloor ? -kInf : best;
    return out;
}

ClassVerdict subexpConvolutionDiagnostic(const TailFunction& tail, double uMax, std::size_t meshN,
                                         const DiagnosticThresholds& th, std::size_t curvePoints) {
    if (!(uMax > 0.0)) throw PreconditionError("subexpConvolutionDiagnostic needs uMax > 0");
    if (meshN < 1000) throw PreconditionError("subexpConvolutionDiagnostic needs meshN >= 1000");
    if (curvePoints < 2) curvePoints = 2;
    ClassVerdict v;
    v.classId = ClassId::S;
    if (tail.isZero()) {
        v.diagnostics = "zero tail: the ratio is undefined";
        return v;
    }
    const auto& k = simd::active();
    // T(u_i) on a mesh of N cells of [0, uMax], i = curve index.
    std::vector<std::size_t> idx(curvePoints);
    for (std::size_t c = 0; c < curvePoints; ++c) idx[c] = (meshN * c) / (curvePoints - 1);
    auto curve = [&](std::size_t mult) {
        const std::size_t N = meshN * mult;
        const double h = uMax / double(N);
        std::vector<double> Fbar(N + 1), dF(N);
        for (std::size_t j = 0; j <= N; ++j) Fbar[j] = std::min(1.0, tail.eval(h * double(j)));
        for (std::size_t j = 0; j < N; ++j) dF[j] = Fbar[j] - Fbar[j + 1];
        const double atom = 1.0 - Fbar[0];
        std::vector<double> T(curvePoints);
        for (std::size_t c = 0; c < curvePoints; ++c) {
            const std::size_t i = idx[c] * mult;
            const double fb = Fbar[i];
            if (!(fb > 0.0)) {
                T[c] = std::numeric_limits<double>::quiet_NaN();
                continue;
            }
            // sum_{j<i} Fbar[i-j] dF[j] plus the mass of F at 0
            const double conv = i ? k.dotReverse(dF.data(), Fbar.data() + 1, i) : 0.0;
            T[c] = (fb + atom * fb + conv) / fb;
        }
        return T;
    };
    const auto coarse = curve(1);
    const auto fine = curve(2);
    double maxErr = 0.0;
    for (std::size_t c = 0; c < curvePoints; ++c) {
        const double u = uMax * double(idx[c]) / double(meshN);
        const double err = std::fabs(fine[c] - coarse[c]);
        v.ratioCurve.emplace_back(u, 2.0 * fine[c] - coarse[c]);
        v.errorCurve.push_back(err);
        if (std::isfinite(err)) maxErr = std::max(maxErr, err);
    }
    const double Tend = v.ratioCurve.back().second;
    const double errEnd = v.errorCurve.back();
    std::ostringstream d;
    d << "T(uMax)=" << Tend << " mesh estimate " << errEnd;
    if (!std::isfinite(Tend)) {
        d << "; survival function vanishes at uMax";
    } else if (errEnd > th.meshTolerance) {
        d << "; mesh too coarse";
    } else if (std::fabs(Tend - 2.0) <= th.s) {
        v.verdict = Verdict::Pass;
    } else if (std::fabs(Tend - 2.0) - errEnd > th.sFailBand) {
        v.verdict = Verdict::Fail;
    }
    v.diagnostics = d.str();
    return v;
}

} // namespace ovl
