#include "ovl/errors.hpp"
#include "ovl/model.hpp"

#include <algorithm>
#include <functional>
#include <cmath>
#include <numbers>

namespace ovl {

namespace {

using cd = std::complex<double>;
constexpr double kPi = std::numbers::pi;

enum class Compensation { None, Full };

// e^{iv} - 1 (- iv when compensated), accurate for small v
cd kernel(double v, Compensation comp) {
    const double h = std::sin(0.5 * v);
    const double re = -2.0 * h * h;
    double im;
    if (comp == Compensation::Full) {
        im = std::fabs(v) < 1e-3 ? -v * v * v / 6.0 * (1.0 - v * v / 20.0) : std::sin(v) - v;
    } else {
        im = std::sin(v);
    }
    return {re, im};
}

// int_0^inf k(wz) f(z) dz for one side of the jump measure (f = -r'), w > 0.
struct SideTail {
    std::function<double(double)> density;  // f(z), z > 0
    std::function<double(double)> tail;     // r(z)
    std::function<double(double)> firstMoment;  // int_Z^inf z f(z) dz, compensated case only
};

cd phiSide(const SideTail& side, double w, Compensation comp) {
    const double zb = 1.0 / w;
    const double yb = std::log(zb);
    QuadOptions q;
    q.relTol = 1e-11;
    q.absTol = 1e-15;
    // near part in log z: integrand k(wz) f(z) z
    auto near = [&](double y) {
        const double z = std::exp(y);
        return kernel(w * z, comp) * (side.density(z) * z);
    };
    std::vector<double> core{yb - 1.0, yb};
    if (yb - 1.0 < 0.0 && 0.0 < yb) core.push_back(0.0);
    OutwardOptions oo;
    oo.firstWidth = 1.0;
    oo.growth = 1.5;
    oo.maxWidth = 4.0;
    oo.negligible = 1e-17;
    oo.absFloor = 1e-18;
    cd total = integrateOutward(near, core, true, false, q, oo).value;

    // far part in z: half-period panels then an integration by parts remainder
    const double half = kPi / w;
    auto osc = [&](double z) { return std::exp(cd(0.0, w * z)) * side.density(z); };
    double Z = zb;
    cd far = 0.0;
    const unsigned maxPanels = 200000;
    for (unsigned k = 0;; ++k) {
        if (k == maxPanels) throw NumericalError("oscillatory tail of the characteristic exponent did not settle");
        const double hstep = 1e-3 * Z;
        const double f0 = side.density(Z);
        const double fp = (side.density(Z + hstep) - side.density(Z - hstep)) / (2.0 * hstep);
        const double fpp = (side.density(Z + hstep) - 2.0 * f0 + side.density(Z - hstep)) / (hstep * hstep);
        const double scale = std::max(std::abs(total + far), 1e-300);
        if (std::fabs(fpp) / (w * w * w) < 1e-12 * scale && f0 / w < 1e-3 * scale && std::fabs(fp) / (w * w) < 1e-6 * scale) {
            const cd iw(0.0, w);
            const cd e = std::exp(cd(0.0, w * Z));
            cd rem = -e * f0 / iw + e * fp / (iw * iw);
            rem -= side.tail(Z);
            if (comp == Compensation::Full) rem -= cd(0.0, w) * side.firstMoment(Z);
            far += rem;
            break;
        }
        auto reP = adaptiveGK([&](double z) { return osc(z).real(); }, Z, Z + half, q);
        auto imP = adaptiveGK([&](double z) { return osc(z).imag(); }, Z, Z + half, q);
        far += cd(reP.value, imP.value);
        Z += half;
    }
    // the (-1 - iwz) parts over [zb, Z] come from the tail and first moment in closed form
    far -= side.tail(zb) - side.tail(Z);
    if (comp == Compensation::Full) far -= cd(0.0, w) * (side.firstMoment(zb) - side.firstMoment(Z));
    return total + far;
}

// jump-measure exponent phi(w) = int (e^{iwx} - 1 [- iwx]) nu(dx) for X(1)
cd phiTotal(const SideTail& plus, const SideTail* minus, double w, Compensation comp) {
    if (w == 0.0) return 0.0;
    const double aw = std::fabs(w);
    cd p = phiSide(plus, aw, comp);
    cd m = minus ? phiSide(*minus, aw, comp) : cd(0.0);
    return w > 0.0 ? p + std::conj(m) : std::conj(p) + m;
}

SideTail fromTail(const TailFunction& r) {
    SideTail s;
    s.density = [&r](double z) { return r.density(z); };
    s.tail = [&r](double z) { return r(z); };
    s.firstMoment = [](double) -> double { throw PreconditionError("compensation needs a stable side"); };
    return s;
}

SideTail stableSide(double alpha, double weight) {
    SideTail s;
    s.density = [=](double z) { return weight * alpha * std::pow(z, -alpha - 1.0); };
    s.tail = [=](double z) { return weight * std::pow(z, -alpha); };
    s.firstMoment = [=](double z) { return weight * alpha * std::pow(z, 1.0 - alpha) / (alpha - 1.0); };
    return s;
}

struct Exponent {
    cd value;
    double error;
};

// log E exp(i theta X(t))
Exponent logCfQuadrature(const ProcessModel& m, double theta, double t) {
    if (t == 0.0 || theta == 0.0) return {0.0, 0.0};
    if (m.kind() == ModelKind::StableLevy) {
        const double a = m.alpha(), b = m.beta();
        if (a == 1.0) throw PreconditionError("quadrature route is not available for alpha = 1");
        // Levy tail of X(1) is (1+beta)/2 x^-alpha on the positive side
        const Compensation comp = a > 1.0 ? Compensation::Full : Compensation::None;
        SideTail p = stableSide(a, (1.0 + b) / 2.0);
        SideTail n = stableSide(a, (1.0 - b) / 2.0);
        cd phi = phiTotal(p, &n, theta, comp);
        return {t * phi, 1e-10 * t * std::abs(phi)};
    }
    // additive: psi = int_{-inf}^{log t} H phi(theta e^{H y}) dy
    const double H = m.H();
    SideTail p = fromTail(m.rPlus());
    SideTail n = fromTail(m.rMinus());
    const bool twoSided = !m.rMinus().isZero();
    auto f = [&](double y) { return H * phiTotal(p, twoSided ? &n : nullptr, theta * std::exp(H * y), Compensation::None); };
    const double top = std::log(t);
    // outer panels sit on integer positions so rescaled runs use unrelated meshes
    const double anchor = std::floor(top);
    std::vector<double> core{anchor - 1.0, anchor, top};
    core.erase(std::unique(core.begin(), core.end()), core.end());
    QuadOptions q;
    q.relTol = 1e-10;
    q.absTol = 1e-14;
    OutwardOptions oo;
    oo.firstWidth = 1.0;
    oo.growth = 1.5;
    oo.maxWidth = 4.0;
    oo.negligible = 1e-16;
    oo.absFloor = 1e-18;
    auto r = integrateOutward(f, core, true, false, q, oo);
    if (!r.converged) throw NumericalError("characteristic exponent quadrature did not converge");
    return {r.value, r.error};
}

} // namespace

CfValue charFunction(const ProcessModel& m, double theta, double t, CfRoute route) {
    if (!(t >= 0.0)) throw PreconditionError("charFunction needs t >= 0");
    const bool closed = m.kind() == ModelKind::StableLevy &&
                        (route == CfRoute::ClosedForm || route == CfRoute::Auto);
    if (route == CfRoute::ClosedForm && m.kind() != ModelKind::StableLevy)
        throw PreconditionError("closed form exists only for stable inputs");
    CfValue out;
    if (closed) {
        const double a = m.alpha(), b = m.beta();
        const double sc = t / stableConstant(a) * std::pow(std::fabs(theta), a);
        const double sg = theta > 0.0 ? 1.0 : (theta < 0.0 ? -1.0 : 0.0);
        const double skew = a == 1.0 ? 0.0 : b * std::tan(kPi * a / 2.0) * sg;
        out.value = std::exp(cd(-sc, sc * skew));
        return out;
    }
    const Exponent e = logCfQuadrature(m, theta, t);
    out.value = std::exp(e.value);
    out.error = std::abs(out.value) * e.error;
    return out;
}

SelfSimReport selfSimilarityCheck(const ProcessModel& m, double a, const std::vector<double>& thetas,
                                  const std::vector<double>& ts, std::optional<double> scalingIndex) {
    if (!(a > 0.0)) throw PreconditionError("selfSimilarityCheck needs a > 0");
    const double h = scalingIndex.value_or(m.H());
    SelfSimReport rep;
    for (double th : thetas) {
        for (double t : ts) {
            const CfValue lhs = charFunction(m, th * std::pow(a, -h), a * t, CfRoute::Quadrature);
            const CfValue rhs = charFunction(m, th, t, CfRoute::Quadrature);
            rep.maxDiscrepancy = std::max(rep.maxDiscrepancy, std::abs(lhs.value - rhs.value));
            rep.maxQuadError = std::max({rep.maxQuadError, lhs.error, rhs.error});
        }
    }
    return rep;
}

} // namespace ovl
