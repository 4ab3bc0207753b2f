#include <catch_amalgamated.hpp>

#include "ovl/errors.hpp"
#include "ovl/model.hpp"

#include <cmath>
#include <numbers>

using namespace ovl;
using Catch::Matchers::WithinRel;
using Catch::Matchers::WithinAbs;

namespace {

// Frozen 30-digit quadratures (mpmath), computed independently of this library.
constexpr double kSHatG3 = 0.584803547642573213101357472028;
constexpr double kSigmaG3 = 1.56919258321419670947507803321;
constexpr double kCurvG3 = 5.73543368498797510392199863814;
constexpr double kRPower100 = 0.0000496097862749613378887251533917;
constexpr double kRWeibull1e4 = 1.13817741602081092117754994073e-62;
constexpr double kRWeibull100 = 0.000000685071201175938169317643008588;
constexpr double kLaplace1e4 = 1.13718938187356110236975328865e-62;
constexpr double kLaplacePrefactor = 2.98090017885818049981264555613;
constexpr double kShiftedRatio1e6 = 8.36355328239400719824434841363;
// exp of H int phi(theta e^{Hy}) dy with phi(w) = 2 e^{-iw} E_3(-iw) - 1 for r = (1+x)^-2
const std::complex<double> kCfPareto11{0.609437530231455767, 0.42230072299771792};
const std::complex<double> kCfPareto205{0.47588992782396775, 0.436334426468945713};

ProcessModel weibullModel(double gamma) {
    return ProcessModel::additive(0.5, TailFunction::weibull(1.0, 0.0, 1.0, 0.5), {}, 1.0, gamma);
}

ProcessModel powerModel(double rho) {
    return ProcessModel::additive(0.5, TailFunction::power(1.0, rho), {}, 1.0, 1.0);
}

} // namespace

TEST_CASE("model construction rejects bad parameters") {
    CHECK_THROWS_AS(ProcessModel::stable(2.5, 0.0, 1.0, 1.0), PreconditionError);
    CHECK_THROWS_AS(ProcessModel::stable(1.5, 1.2, 1.0, 1.0), PreconditionError);
    CHECK_THROWS_AS(ProcessModel::stable(1.0, 0.5, 1.0, 2.0), PreconditionError);
    CHECK_THROWS_AS(ProcessModel::stable(1.5, 0.0, 1.0, 0.5), PreconditionError);
    CHECK_THROWS_AS(ProcessModel::additive(0.5, TailFunction::power(1, 2), {}, -1.0, 1.0), PreconditionError);
    CHECK_THROWS_AS(ProcessModel::additive(0.5, TailFunction::power(1, 2), {}, 1.0, 0.5), PreconditionError);
    // bounded at the origin, so integrable there
    CHECK_NOTHROW(ProcessModel::additive(0.5, TailFunction::logForm(1.0), {}, 1.0, 1.0));
    CHECK(powerModel(2).nonnegativeJumps());
    CHECK_FALSE(ProcessModel::stable(1.5, 0.0, 1.0, 1.0).nonnegativeJumps());
}

TEST_CASE("stable constants") {
    CHECK_THAT(stableConstant(1.5), WithinRel(0.3989422804014327, 1e-12));
    CHECK_THAT(stablePathScale(1.5), WithinRel(std::pow(0.3989422804014327, -1.0 / 1.5), 1e-12));
    CHECK_THAT(stableConstant(1.0), WithinRel(2.0 / std::numbers::pi, 1e-15));
}

TEST_CASE("sigma profile closed forms") {
    const SigmaProfile a = sigmaProfile(powerModel(2));
    CHECK_THAT(a.plus(1.0), WithinRel(2.0, 1e-14));
    CHECK_THAT(a.sHat, WithinRel(1.0, 1e-14));
    CHECK_THAT(a.sigmaMin, WithinRel(2.0, 1e-14));
    CHECK_THAT(a.curvature, WithinRel(0.5, 1e-12));

    const SigmaProfile b = sigmaProfile(weibullModel(3));
    CHECK_THAT(b.sHat, WithinRel(kSHatG3, 1e-12));
    CHECK_THAT(b.sigmaMin, WithinRel(kSigmaG3, 1e-12));
    CHECK_THAT(b.curvature, WithinRel(kCurvG3, 1e-12));
}

TEST_CASE("sigma profile minimum dominates samples") {
    for (double g : {0.6, 1.0, 2.0, 3.0, 7.0}) {
        const SigmaProfile p = sigmaProfile(ProcessModel::additive(0.5, TailFunction::power(1, 2), {}, 1.3, g));
        for (int k = 0; k < 1000; ++k) {
            const double s = std::pow(10.0, -6.0 + 12.0 * k / 999.0);
            CHECK(p.sigmaMin <= p.plus(s) * (1 + 1e-15));
            CHECK(p.plus(s) > 0.0);
        }
        CHECK(p.plus(1e-6) > p.plus(1e-5));
        CHECK(p.plus(1e6) > p.plus(1e5));
    }
}

TEST_CASE("rNumeric on the power model") {
    const auto m = powerModel(2);
    const RValue r = rNumeric(m, 100.0);
    CHECK_THAT(r.value, WithinRel(kRPower100, 1e-8));
    CHECK_THAT(r.value, WithinRel(0.5 * std::pow(101.0, -2.0), 0.10));
    CHECK(r.quadError < 1e-8 * r.value);
    // the cap
    const RValue small = rNumeric(m, 1e-3);
    CHECK(small.raw > 1.0);
    CHECK(small.value == 1.0);
}

TEST_CASE("rNumeric is monotone and bounded") {
    for (const auto& m : {powerModel(2), powerModel(0.5), weibullModel(1), weibullModel(3)}) {
        double prev = 2.0;
        for (int k = 0; k <= 40; ++k) {
            const double u = std::pow(10.0, -2.0 + 0.2 * k);
            const double v = rNumeric(m, u).value;
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
            CHECK(v <= prev * (1 + 1e-9));
            prev = v;
        }
    }
    const auto zero = ProcessModel::additive(0.5, TailFunction::zero(), {}, 1.0, 1.0);
    CHECK(rNumeric(zero, 10.0).value == 0.0);
}

TEST_CASE("rNumeric on the Weibull model against high precision quadrature") {
    const auto m = weibullModel(1);
    CHECK_THAT(rNumeric(m, 1e4).value, WithinRel(kRWeibull1e4, 1e-8));
    CHECK_THAT(rNumeric(m, 100.0).value, WithinRel(kRWeibull100, 1e-8));
    // far below the double range the log value survives
    const RValue deep = rNumeric(m, 1e8);
    CHECK(deep.raw == 0.0);
    CHECK(std::isfinite(deep.logRaw));
    CHECK_THAT(deep.logRaw, WithinRel(rLaplace(m, 1e8).logValue, 1e-6));
}

TEST_CASE("rAsymptoticRV constants") {
    CHECK_THAT(rAsymptoticRV(powerModel(2)).C, WithinRel(0.5, 1e-9));
    CHECK_THAT(rAsymptoticRV(powerModel(3)).C, WithinAbs(std::numbers::pi / 16.0, 1e-6));
    const auto two = ProcessModel::additive(0.5, TailFunction::power(1, 3), TailFunction::power(7, 3), 1, 1);
    CHECK_THAT(rAsymptoticRV(two).C, WithinAbs(std::numbers::pi / 16.0, 1e-6));
    CHECK_THROWS_AS(rAsymptoticRV(weibullModel(1)), PreconditionError);
    const auto m = powerModel(2);
    const double ratio = rNumeric(m, 100.0).value / (0.5 * std::pow(101.0, -2.0));
    CHECK(std::fabs(ratio - 1.0) < 0.1);
}

TEST_CASE("rStableClosed") {
    const auto m = ProcessModel::stable(1.5, 0.0, 1.0, 1.0);
    for (double u : {10.0, 100.0, 1e4})
        CHECK_THAT(rStableClosed(m, u).value, WithinRel(std::pow(u, -1.5), 1e-12));
    CHECK_THAT(rStableClosed(ProcessModel::stable(1.5, 1.0, 1.0, 1.0), 100.0).value,
               WithinRel(2.0 * std::pow(100.0, -1.5), 1e-12));
    CHECK_THROWS_AS(rStableClosed(ProcessModel::stable(1.5, -1.0, 1.0, 1.0), 10.0), PreconditionError);
    // alpha gamma <= 1 would diverge, but gamma > H = 1/alpha already excludes it
    CHECK_THROWS_AS(ProcessModel::stable(0.8, 0.0, 1.0, 1.0), PreconditionError);
    // exact power law and quadrature cross-check
    const auto g = ProcessModel::stable(1.2, 0.3, 0.7, 2.0);
    const double k = rStableClosed(g, 10.0).value * std::pow(10.0, 1.2);
    for (double u : {30.0, 300.0, 3000.0}) {
        CHECK_THAT(rStableClosed(g, u).value * std::pow(u, 1.2), WithinRel(k, 1e-12));
        CHECK_THAT(rNumeric(g, u).value, WithinRel(rStableClosed(g, u).value, 1e-8));
    }
    // composition with the overload exponent: R(u^(1-H/gamma)) = const u^-(alpha-1/gamma)
    const double H = g.H(), ga = g.gamma(), a = g.alpha();
    const double k2 = rStableClosed(g, std::pow(10.0, 1 - H / ga)).value * std::pow(10.0, a - 1 / ga);
    for (double u : {1e2, 1e3, 1e5})
        CHECK_THAT(rStableClosed(g, std::pow(u, 1 - H / ga)).value * std::pow(u, a - 1 / ga), WithinRel(k2, 1e-11));
}

TEST_CASE("rLaplace") {
    const auto m = weibullModel(1);
    const LaplaceValue l = rLaplace(m, 1e4);
    CHECK_THAT(l.prefactor, WithinRel(kLaplacePrefactor, 1e-12));
    CHECK_THAT(l.value, WithinRel(kLaplace1e4, 1e-10));
    const double ratio = l.value / rNumeric(m, 1e4).value;
    CHECK(ratio >= 0.95);
    CHECK(ratio <= 1.05);
    // doubling u moves the log by the exponent difference plus the u^-1/4 term
    const double d = rLaplace(m, 2e4).logValue - l.logValue;
    CHECK_THAT(d, WithinRel(-std::sqrt(2.0) * (std::sqrt(2e4) - 100.0) - 0.25 * std::log(2.0), 1e-12));
    CHECK_THROWS_AS(rLaplace(powerModel(2), 10.0), PreconditionError);
    // ratio approaches 1
    double prev = 1.0;
    for (double u : {1e2, 1e3, 1e4, 1e5}) {
        const double e = std::fabs(std::exp(rLaplace(m, u).logValue - rNumeric(m, u).logRaw) - 1.0);
        CHECK(e < prev);
        prev = e;
    }
}

TEST_CASE("shifted R and the limiting ratio") {
    const auto m = weibullModel(3);
    const ShiftedValue z = rShiftedNumeric(m, 0.0, 1e6);
    CHECK_THAT(z.ratio, WithinAbs(1.0, 1e-9));
    const ShiftedValue s = rShiftedNumeric(m, 1.0, 1e6);
    CHECK_THAT(s.ratio, WithinRel(kShiftedRatio1e6, 1e-6));
    CHECK(s.ratio > 2.0);
    double prev = 0.0;
    for (double t : {0.0, 0.5, 1.0}) {
        const double r = rShiftedNumeric(m, t, 1e5).ratio;
        CHECK(r >= prev);
        prev = r;
    }
    CHECK(piterbargLimitRatio(m, 0.0) == 1.0);
    CHECK_THAT(piterbargLimitRatio(m, 1.0),
               WithinRel(std::exp(std::sqrt(kSigmaG3) * 0.5 / kSHatG3), 1e-12));
    CHECK(piterbargLimitRatio(m, 0.1) > 1.0);
    CHECK_THROWS_AS(piterbargLimitRatio(weibullModel(2), 1.0), PreconditionError);
}

TEST_CASE("regime classifier decision table") {
    const auto st = regimeClassifier(ProcessModel::stable(1.5, 0.0, 1.0, 0.7));
    CHECK(st.verdict == RegimeOutcome::AllGammaHold);
    CHECK_THAT(st.windowExponent.value(), WithinRel(1 / 0.7, 1e-15));
    CHECK(regimeClassifier(weibullModel(3)).verdict == RegimeOutcome::PiterbargAbsent);
    CHECK(regimeClassifier(weibullModel(2)).verdict == RegimeOutcome::Unresolved);
    CHECK(regimeClassifier(weibullModel(1.4)).verdict == RegimeOutcome::PiterbargHolds);
    CHECK(regimeClassifier(powerModel(2)).verdict == RegimeOutcome::AllGammaHold);
    CHECK(regimeClassifier(ProcessModel::stable(1.5, -1.0, 1.0, 1.0)).verdict == RegimeOutcome::Rejected);
    const auto v = regimeClassifier(weibullModel(2));
    CHECK_THAT(*v.gamma2, WithinRel(1.5, 1e-15));
    CHECK_THAT(*v.gamma3, WithinRel(2.5, 1e-15));
    CHECK_THAT(v.gamma1, WithinRel(1.0, 1e-15));
    CHECK_THROWS_AS(regimeClassifier(ProcessModel::additive(0.5, TailFunction::logForm(1), {}, 1, 1)),
                    PreconditionError);
}

TEST_CASE("regime thresholds are ordered") {
    for (double H = 0.05; H < 3.0; H += 0.15)
        for (double aw = 0.05; aw < 1.0; aw += 0.1) {
            const auto v = regimeClassifier(ProcessModel::additive(H, TailFunction::weibull(1, 0, 1, aw), {}, 1, H + 1));
            CHECK(v.gamma1 <= *v.gamma2);
            CHECK(*v.gamma2 <= *v.gamma3);
        }
}

TEST_CASE("regime table") {
    RegimeSweep sw;
    sw.family = "weibull";
    sw.H = {0.5};
    sw.gamma = {0.4, 1.2, 1.6, 2.4, 2.6};
    const auto rows = emitRegimeTable(sw);
    REQUIRE(rows.size() == 5);
    CHECK(rows[0].verdict.verdict == RegimeOutcome::Rejected);
    CHECK(rows[1].verdict.verdict == RegimeOutcome::PiterbargHolds);
    CHECK(rows[2].verdict.verdict == RegimeOutcome::Unresolved);
    CHECK(rows[3].verdict.verdict == RegimeOutcome::Unresolved);
    CHECK(rows[4].verdict.verdict == RegimeOutcome::PiterbargAbsent);
    CHECK(rows[1].boundary);
    CHECK(rows[2].boundary);
    CHECK_FALSE(rows[3].boundary);
    CHECK(rows[4].boundary);
    sw.family = "nonsense";
    sw.gamma = {1.0};
    CHECK_THROWS_AS(emitRegimeTable(sw), ConfigError);
}

TEST_CASE("characteristic function basics") {
    const auto st = ProcessModel::stable(1.5, 0.0, 1.0, 1.0);
    const auto pa = powerModel(2);
    for (const auto* m : {&st, &pa}) {
        CHECK(charFunction(*m, 0.0, 1.0, CfRoute::Quadrature).value == std::complex<double>(1.0, 0.0));
        const auto p = charFunction(*m, 1.3, 0.7, CfRoute::Quadrature).value;
        const auto n = charFunction(*m, -1.3, 0.7, CfRoute::Quadrature).value;
        CHECK(std::abs(p - std::conj(n)) < 1e-13);
        CHECK(std::abs(p) <= 1.0);
    }
}

TEST_CASE("stable characteristic function: two routes agree") {
    for (double beta : {0.0, 0.5, -0.7}) {
        for (double alpha : {1.5, 0.7}) {
            const auto m = ProcessModel::stable(alpha, beta, 1.0, 2.0);
            for (double th : {-2.0, 0.3, 1.0, 4.0}) {
                const auto a = charFunction(m, th, 1.0, CfRoute::ClosedForm).value;
                const auto b = charFunction(m, th, 1.0, CfRoute::Quadrature).value;
                CHECK(std::abs(a - b) < 1e-6);
            }
        }
    }
}

TEST_CASE("additive characteristic function against an exponential integral oracle") {
    const auto m = powerModel(2);
    CHECK(std::abs(charFunction(m, 1.0, 1.0).value - kCfPareto11) < 1e-9);
    CHECK(std::abs(charFunction(m, 2.0, 0.5).value - kCfPareto205) < 1e-9);
}

TEST_CASE("self similarity check") {
    const auto pa = powerModel(2);
    const std::vector<double> th{0.5, 1.0, 2.0}, ts{0.5, 1.0};
    CHECK(selfSimilarityCheck(pa, 1.0, th, ts).maxDiscrepancy == 0.0);
    CHECK(selfSimilarityCheck(pa, 2.0, th, ts).maxDiscrepancy < 1e-6);
    CHECK(selfSimilarityCheck(pa, 2.0, th, ts, 0.6).maxDiscrepancy > 1e-2);
    const auto st = ProcessModel::stable(1.5, 0.0, 1.0, 1.0);
    CHECK(selfSimilarityCheck(st, 2.0, th, ts).maxDiscrepancy < 1e-6);
}
