#include "ovl/model.hpp"

#include "ovl/errors.hpp"

#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>

namespace ovl {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// log(1 + e^x) without overflow
double softplus(double x) { return x > 30.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

double logSumExp(double a, double b) {
    if (a == -kInf) return b;
    if (b == -kInf) return a;
    const double m = std::max(a, b);
    return m + std::log(std::exp(a - m) + std::exp(b - m));
}

void requireService(double c, double gamma, double H) {
    if (!(c > 0.0) || !std::isfinite(c)) throw PreconditionError("service rate c must be positive");
    if (!(gamma > H)) throw PreconditionError("service exponent gamma must exceed H");
}

struct LogIntegral {
    double logValue = -kInf;
    double relError = 0.0;
    bool converged = true;
};

// log of int_lo^hi exp(logf(y)) dy for an integrand peaked at yPeak (lo may
// be -inf, hi may be +inf). The integrand is rescaled by its peak value so
// results far below the double range are still resolved.
LogIntegral logAxisIntegral(const std::function<double(double)>& logf, double yPeak, double lo, double hi,
                            const QuadOptions& opt) {
    LogIntegral out;
    const double L0 = logf(yPeak);
    if (L0 == -kInf) return out;
    if (!std::isfinite(L0)) throw NumericalError("integrand is not finite at its peak");
    // local scale from curvature, else from slope
    const double h = 1e-3;
    const double fl = std::isfinite(lo) ? std::max(yPeak - h, lo) : yPeak - h;
    const double fr = std::isfinite(hi) ? std::min(yPeak + h, hi) : yPeak + h;
    double w = 1.0;
    const double a = logf(fl), b = logf(fr);
    if (fr - fl > 1.5 * h) {
        const double curv = -(a - 2.0 * L0 + b) / (h * h);
        if (curv > 0.0 && std::isfinite(curv)) w = std::min(w, 1.0 / std::sqrt(curv));
    }
    const double slope = std::fabs(b - a) / (fr - fl);
    if (slope > 0.0 && std::isfinite(slope)) w = std::min(w, 1.0 / slope);
    w = std::max(w, 1e-7);

    // An integrand that has not decayed 650 e-folds out only looks integrable
    // because exp(y) overflows beyond that; call it divergent.
    const double reach = 650.0, tiny = -32.0;
    if (!std::isfinite(lo) && logf(yPeak - reach) - L0 > tiny)
        throw NumericalError("integral divergent towards the lower end (no decay within the double range)");
    if (!std::isfinite(hi) && logf(yPeak + reach) - L0 > tiny)
        throw NumericalError("integral divergent towards the upper end (no decay within the double range)");

    std::vector<double> core;
    for (double k : {-8.0, -4.0, -2.0, -1.0, 0.0, 1.0, 2.0, 4.0, 8.0}) {
        const double y = yPeak + k * w;
        if (y > lo && y < hi) core.push_back(y);
    }
    if (std::isfinite(lo)) core.push_back(lo);
    if (std::isfinite(hi)) core.push_back(hi);
    std::sort(core.begin(), core.end());
    core.erase(std::unique(core.begin(), core.end()), core.end());

    auto f = [&](double y) {
        const double v = logf(y) - L0;
        return v < -745.0 ? 0.0 : std::exp(v);
    };
    QuadOptions q = opt;
    q.absTol = std::max(opt.absTol, 1e-3 * opt.relTol * w);
    OutwardOptions oo;
    oo.firstWidth = 4.0 * w;
    oo.growth = 2.0;
    oo.negligible = 1e-17;
    auto r = integrateOutward(f, core, !std::isfinite(lo), !std::isfinite(hi), q, oo);
    if (!(r.value > 0.0)) throw NumericalError("integral vanished after rescaling", 0.0);
    out.logValue = L0 + std::log(r.value);
    out.relError = r.error / r.value;
    out.converged = r.converged;
    return out;
}

std::string divergentEnd(const NumericalError& e) {
    const std::string w = e.what();
    if (w.find("lower") != std::string::npos) return "s -> 0";
    if (w.find("upper") != std::string::npos) return "s -> infinity";
    return "unknown end";
}

const WeibullForm& requireWeibull(const ProcessModel& m, const char* op) {
    if (m.kind() != ModelKind::SelfSimilarAdditive)
        throw PreconditionError(std::string(op) + " needs a self-similar additive model");
    const auto* w = std::get_if<WeibullForm>(&m.rPlus().form());
    if (!w) throw PreconditionError(std::string(op) + " needs a Weibull-type positive tail");
    return *w;
}

} // namespace

// ---------------------------------------------------------------- model

ProcessModel ProcessModel::stable(double alpha, double beta, double c, double gamma) {
    if (!(alpha > 0.0 && alpha < 2.0)) throw PreconditionError("stable alpha must lie in (0,2)");
    if (!(beta >= -1.0 && beta <= 1.0)) throw PreconditionError("stable beta must lie in [-1,1]");
    if (alpha == 1.0 && beta != 0.0) throw PreconditionError("alpha = 1 requires beta = 0");
    ProcessModel m;
    m.kind_ = ModelKind::StableLevy;
    m.alpha_ = alpha;
    m.beta_ = beta;
    m.H_ = 1.0 / alpha;
    requireService(c, gamma, m.H_);
    m.c_ = c;
    m.gamma_ = gamma;
    return m;
}

ProcessModel ProcessModel::additive(double H, TailFunction rPlus, std::optional<TailFunction> rMinus, double c,
                                    double gamma) {
    if (!(H > 0.0) || !std::isfinite(H)) throw PreconditionError("H must be positive");
    requireService(c, gamma, H);
    ProcessModel m;
    m.kind_ = ModelKind::SelfSimilarAdditive;
    m.H_ = H;
    m.c_ = c;
    m.gamma_ = gamma;
    m.rPlus_ = std::move(rPlus);
    m.rMinus_ = rMinus ? std::move(*rMinus) : TailFunction::zero();
    // the jump measure must integrate |x| near the origin
    const double mass = m.rPlus_->integral(1.0) + m.rMinus_->integral(1.0);
    if (!std::isfinite(mass)) throw PreconditionError("tails are not integrable on (0,1]");
    return m;
}

double ProcessModel::logJumpTail(double x) const {
    if (kind_ == ModelKind::StableLevy) {
        const double w = alpha_ * (1.0 + beta_) / 2.0;
        return w > 0.0 ? std::log(w) - alpha_ * std::log(x) : -kInf;
    }
    return rPlus_->logEval(x);
}

bool ProcessModel::nonnegativeJumps() const {
    if (kind_ == ModelKind::StableLevy) return beta_ == 1.0;
    return rMinus_->isZero();
}

double stableConstant(double alpha) {
    if (alpha == 1.0) return 2.0 / std::numbers::pi;
    return 1.0 / (std::tgamma(1.0 - alpha) * std::cos(std::numbers::pi * alpha / 2.0));
}

double stablePathScale(double alpha) { return std::pow(stableConstant(alpha), -1.0 / alpha); }

// ---------------------------------------------------------------- sigma

double SigmaProfile::logPlus(double s) const {
    const double y = std::log(s);
    return softplus(std::log(c) + gamma * y) - H * y;
}

double SigmaProfile::plus(double s) const { return std::exp(logPlus(s)); }

namespace {

double logSigmaAt(const SigmaProfile& p, double y) { return softplus(std::log(p.c) + p.gamma * y) - p.H * y; }

} // namespace

SigmaProfile sigmaProfile(const ProcessModel& m) {
    SigmaProfile p;
    p.H = m.H();
    p.c = m.c();
    p.gamma = m.gamma();
    const double H = p.H, g = p.gamma, c = p.c;
    p.sHat = std::pow(H / (c * (g - H)), 1.0 / g);
    p.sigmaMin = p.plus(p.sHat);
    p.curvature = H * (H + 1.0) * std::pow(p.sHat, -H - 2.0) +
                  c * (g - H) * (g - H - 1.0) * std::pow(p.sHat, g - H - 2.0);

    // numeric cross-checks: Brent on log s, central differences with one Richardson step
    const double yHat = std::log(p.sHat);
    const double lo = std::log(1e-6), hi = std::log(1e6);
    if (yHat > lo && yHat < hi) {
        auto res = boost::math::tools::brent_find_minima([&](double y) { return logSigmaAt(p, y); }, lo, hi, 40);
        if (std::fabs(res.first - yHat) > 1e-6 * std::max(1.0, std::fabs(yHat)) &&
            std::fabs(res.second - logSigmaAt(p, yHat)) > 1e-12)
            throw NumericalError("sigma profile minimizer is not unique (numeric and closed form disagree)");
    }
    auto second = [&](double h) {
        return (p.plus(p.sHat + h) - 2.0 * p.sigmaMin + p.plus(p.sHat - h)) / (h * h);
    };
    const double h = 1e-4 * p.sHat;
    const double fd = (4.0 * second(h / 2.0) - second(h)) / 3.0;
    if (!(p.curvature > 0.0) || p.curvature * p.sHat * p.sHat < 1e-12 * p.sigmaMin)
        throw NumericalError("degenerate sigma profile: flat valley at the minimizer");
    if (std::fabs(fd - p.curvature) > 1e-4 * p.curvature)
        throw InvariantError("sigma curvature: closed form and finite differences disagree");
    return p;
}

// ---------------------------------------------------------------- R

RValue rNumeric(const ProcessModel& m, double u, const QuadOptions& opt) {
    if (!(u > 0.0)) throw PreconditionError("rNumeric needs u > 0");
    RValue out;
    if ((m.kind() == ModelKind::SelfSimilarAdditive && m.rPlus().isZero()) ||
        (m.kind() == ModelKind::StableLevy && m.beta() == -1.0)) {
        out.logRaw = -kInf;
        return out;
    }
    const SigmaProfile p = sigmaProfile(m);
    const double lu = std::log(u);
    auto logf = [&](double y) { return m.logJumpTail(std::exp(logSigmaAt(p, y) + lu)); };
    LogIntegral li;
    try {
        li = logAxisIntegral(logf, std::log(p.sHat), -kInf, kInf, opt);
    } catch (const NumericalError& e) {
        throw NumericalError(std::string("R quadrature failed: ") + e.what(), e.partial * m.H());
    }
    out.logRaw = std::log(m.H()) + li.logValue;
    out.raw = std::exp(out.logRaw);
    out.value = std::min(1.0, out.raw);
    out.relError = li.relError;
    out.quadError = out.raw * li.relError;
    if (!li.converged || li.relError > std::max(opt.relTol, 1e-6) * 10.0)
        throw NumericalError("R quadrature did not converge", out.value);
    return out;
}

RValue rStableClosed(const ProcessModel& m, double u) {
    if (m.kind() != ModelKind::StableLevy) throw PreconditionError("rStableClosed needs a stable model");
    if (m.beta() == -1.0)
        throw PreconditionError("beta = -1: R vanishes identically, the heavy-tail results do not apply");
    if (!(u > 0.0)) throw PreconditionError("rStableClosed needs u > 0");
    const double a = m.alpha(), g = m.gamma(), c = m.c();
    double I = 0.0, err = 0.0;
    if (a * g > 1.0) {
        I = std::pow(c, -1.0 / g) / g * std::beta(1.0 / g, a - 1.0 / g);
    } else {
        // diverges at infinity; quadrature reports it
        auto f = [&](double y) { return std::exp(-a * softplus(std::log(c) + g * y) + y); };
        auto r = integrateOutward(f, {-1.0, 0.0, 1.0}, true, true);
        I = r.value;
        err = r.error;
    }
    RValue out;
    out.logRaw = -a * std::log(u) + std::log((1.0 + m.beta()) / 2.0) + std::log(I);
    out.raw = std::exp(out.logRaw);
    out.value = std::min(1.0, out.raw);
    out.relError = I > 0.0 ? err / I : 0.0;
    out.quadError = out.raw * out.relError;
    return out;
}

RvConstant rAsymptoticRV(const ProcessModel& m) {
    if (m.kind() != ModelKind::SelfSimilarAdditive) throw PreconditionError("rAsymptoticRV needs an additive model");
    const auto* pw = std::get_if<PowerForm>(&m.rPlus().form());
    if (!pw) throw PreconditionError("rAsymptoticRV needs a power-law positive tail");
    const SigmaProfile p = sigmaProfile(m);
    const double rho = pw->rho, eps = 0.1 * rho;
    const double yHat = std::log(p.sHat);
    // integrability of sigma^-(rho -+ eps) at both ends
    for (double e : {rho - eps, rho + eps}) {
        try {
            logAxisIntegral([&](double y) { return -e * logSigmaAt(p, y); }, yHat, -kInf, kInf, {});
        } catch (const NumericalError& err) {
            throw PreconditionError("integrability check failed: sigma^-(rho+-eps) diverges as " + divergentEnd(err));
        }
    }
    LogIntegral li;
    try {
        li = logAxisIntegral([&](double y) { return -rho * logSigmaAt(p, y); }, yHat, -kInf, kInf, {});
    } catch (const NumericalError& err) {
        throw PreconditionError("C_RV integral diverges as " + divergentEnd(err));
    }
    RvConstant out;
    out.C = m.H() * std::exp(li.logValue);
    out.quadError = out.C * li.relError;
    if (!std::isfinite(out.C)) throw NumericalError("C_RV is not finite");
    return out;
}

LaplaceValue rLaplace(const ProcessModel& m, double u) {
    const WeibullForm& w = requireWeibull(m, "rLaplace");
    if (!(u > 0.0)) throw PreconditionError("rLaplace needs u > 0");
    SigmaProfile p;
    try {
        p = sigmaProfile(m);
    } catch (const NumericalError& e) {
        throw PreconditionError(std::string("rLaplace: ") + e.what());
    }
    const double s = p.sigmaMin, aw = w.alphaW;
    LaplaceValue out;
    const double logPref = 0.5 * std::log(2.0 * std::numbers::pi) + std::log(m.H()) + w.rhoG * std::log(s) -
                           std::log(p.sHat) -
                           0.5 * std::log(w.A * aw * p.curvature / std::pow(s, 1.0 - aw)) + std::log(w.G);
    out.prefactor = std::exp(logPref);
    out.logValue = logPref + (w.rhoG - aw / 2.0) * std::log(u) - w.A * std::pow(s, aw) * std::pow(u, aw);
    out.value = std::exp(out.logValue);
    return out;
}

ShiftedValue rShiftedNumeric(const ProcessModel& m, double t, double u, const QuadOptions& opt) {
    requireWeibull(m, "rShiftedNumeric");
    if (!(t >= 0.0)) throw PreconditionError("rShiftedNumeric needs t >= 0");
    const SigmaProfile p = sigmaProfile(m);
    const RValue base = rNumeric(m, u, opt);
    const double H = m.H(), g = m.gamma(), lc = std::log(m.c()), lu = std::log(u);
    const double tau = t / std::pow(u, 1.0 / (g - H));
    const auto& r = m.rPlus();
    ShiftedValue out;
    out.logR = base.logRaw;
    if (tau == 0.0) {
        out.logRt = base.logRaw;
        out.ratio = 1.0;
        out.quadError = base.relError;
        return out;
    }
    const double lt = std::log(tau);
    // before the shift point: r(y^-H u), increasing in y
    auto logf1 = [&](double y) { return r.logEval(std::exp(-H * y + lu)); };
    // after: r((1 + c (y - tau)^gamma) y^-H u)
    auto logSig = [&](double y) {
        const double ey = std::exp(y);
        const double d = ey - tau;
        const double core = d > 0.0 ? softplus(lc + g * std::log(d)) : 0.0;
        return core - H * y;
    };
    auto logf2 = [&](double y) { return r.logEval(std::exp(logSig(y) + lu)); };
    const double top = std::max(std::log(p.sHat + tau) + 10.0, lt + 10.0);
    auto pk = boost::math::tools::brent_find_minima(logSig, lt, top, 50);
    const LogIntegral a = logAxisIntegral(logf1, lt, -kInf, lt, opt);
    const LogIntegral b = logAxisIntegral(logf2, pk.first, lt, kInf, opt);
    out.logRt = std::log(H) + logSumExp(a.logValue, b.logValue);
    out.ratio = std::exp(out.logRt - out.logR);
    out.quadError = std::max(a.relError, b.relError) + base.relError;
    if (!a.converged || !b.converged) throw NumericalError("shifted R quadrature did not converge", out.ratio);
    return out;
}

double piterbargLimitRatio(const ProcessModel& m, double t) {
    const WeibullForm& w = requireWeibull(m, "piterbargLimitRatio");
    if (!(t >= 0.0)) throw PreconditionError("piterbargLimitRatio needs t >= 0");
    if (m.gamma() < m.H() + 1.0 / w.alphaW)
        throw PreconditionError("piterbargLimitRatio applies only for gamma >= H + 1/alphaW; see regimeClassifier");
    const SigmaProfile p = sigmaProfile(m);
    return std::exp(w.A * std::pow(p.sigmaMin, w.alphaW) * std::min(m.H(), 1.0) * t / p.sHat);
}

// ---------------------------------------------------------------- regimes

const char* regimeName(RegimeOutcome r) {
    switch (r) {
    case RegimeOutcome::PiterbargHolds: return "holds";
    case RegimeOutcome::PiterbargAbsent: return "absent";
    case RegimeOutcome::AllGammaHold: return "allGammaHold";
    case RegimeOutcome::Rejected: return "rejected";
    default: return "unresolved";
    }
}

RegimeVerdict regimeClassifier(const ProcessModel& m) {
    RegimeVerdict v;
    const double H = m.H(), g = m.gamma(), h1 = std::min(H, 1.0);
    v.gamma1 = H + h1;
    std::ostringstream s;
    const bool stable = m.kind() == ModelKind::StableLevy;
    if (stable && m.beta() == -1.0) {
        v.verdict = RegimeOutcome::Rejected;
        v.statement = "beta = -1: no positive jumps, R vanishes and overload is not covered";
        return v;
    }
    if (stable || std::holds_alternative<PowerForm>(m.rPlus().form())) {
        v.verdict = RegimeOutcome::AllGammaHold;
        v.windowExponent = 1.0 / g;
        s << "Piterbarg property for every gamma > H; strong property for t(u) = o(u^" << 1.0 / g << ")";
        v.statement = s.str();
        return v;
    }
    const auto* w = std::get_if<WeibullForm>(&m.rPlus().form());
    if (!w) throw PreconditionError("regimeClassifier supports power-law, Weibull-type and stable inputs only");
    const double aw = w->alphaW;
    v.gamma2 = H + h1 / aw;
    v.gamma3 = H + 1.0 / aw;
    if (g < *v.gamma2) {
        v.verdict = RegimeOutcome::PiterbargHolds;
    } else if (g >= *v.gamma3) {
        v.verdict = RegimeOutcome::PiterbargAbsent;
    } else {
        v.verdict = RegimeOutcome::Unresolved;
    }
    s << "gamma1=" << v.gamma1 << " gamma2=" << *v.gamma2 << " gamma3=" << *v.gamma3;
    if (v.verdict == RegimeOutcome::PiterbargHolds) {
        // strong property window from v(u) = u^beta with beta just below 1 - alphaW
        const double e = 1.0 / g - aw * (1.0 - H / g) / h1;
        if (e > 0.0) {
            v.windowExponent = e;
            s << "; strong property for t(u) = o(u^e), e < " << e;
        }
    } else if (v.verdict == RegimeOutcome::PiterbargAbsent) {
        s << "; gamma >= gamma3: Piterbarg property absent";
    } else {
        s << "; gamma2 <= gamma < gamma3: not decided by the available conditions";
    }
    if (!m.nonnegativeJumps()) s << "; two-sided jumps: left-tail condition assumed";
    v.statement = s.str();
    return v;
}

std::vector<RegimeRow> emitRegimeTable(const RegimeSweep& sw) {
    std::vector<RegimeRow> rows;
    for (double H : sw.H) {
        const std::size_t first = rows.size();
        for (double g : sw.gamma) {
            RegimeRow row;
            row.H = H;
            row.gamma = g;
            try {
                if (!(g > H)) throw PreconditionError("gamma must exceed H");
                if (sw.family == "weibull") {
                    row.verdict = regimeClassifier(
                        ProcessModel::additive(H, TailFunction::weibull(1.0, 0.0, 1.0, sw.alphaW), {}, 1.0, g));
                } else if (sw.family == "power") {
                    row.verdict = regimeClassifier(ProcessModel::additive(H, TailFunction::power(1.0, sw.rho), {}, 1.0, g));
                } else if (sw.family == "stable") {
                    row.verdict = regimeClassifier(ProcessModel::stable(1.0 / H, 0.0, 1.0, g));
                } else {
                    throw ConfigError("unknown regime family '" + sw.family + "'");
                }
            } catch (const PreconditionError& e) {
                row.verdict = RegimeVerdict{};
                row.verdict.gamma1 = H + std::min(H, 1.0);
                row.verdict.verdict = RegimeOutcome::Rejected;
                row.message = e.what();
            }
            if (rows.size() > first && rows.back().verdict.verdict != row.verdict.verdict) row.boundary = true;
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

} // namespace ovl
