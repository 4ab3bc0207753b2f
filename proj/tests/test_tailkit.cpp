#include <catch_amalgamated.hpp>

#include "ovl/errors.hpp"
#include "ovl/quadrature.hpp"
#include "ovl/tailkit.hpp"

#include <cmath>
#include <limits>

using namespace ovl;
using Catch::Approx;

namespace {

// Frozen oracles (30-digit quadrature of the Pareto convolution, closed forms).
constexpr double kParetoT1000 = 2.0040565093732870839;
constexpr double kParetoT100 = 2.0427161193428285820;
constexpr double kLogRatio1e10 = 0.97077670915142056296;
constexpr double kWeibullShift1e6 = 0.99950012510410672373;
constexpr double kWeibullIntegral9 = 1.6017034530570884562;

std::vector<TailFunction> families() {
    std::vector<double> x, r;
    for (int i = 0; i <= 200; ++i) {
        x.push_back(0.5 * i);
        r.push_back(std::exp(-0.5 * i));
    }
    return {TailFunction::power(1.0, 2.0), TailFunction::power(3.0, 0.5), TailFunction::weibull(1.0, 0.0, 1.0, 0.5),
            TailFunction::weibull(2.0, -1.5, 0.7, 0.3), TailFunction::weibull(1.0, 2.0, 1.0, 0.5),
            TailFunction::logForm(1.0), TailFunction::tabulated(x, r, Extrapolation::PowerLaw)};
}

} // namespace

TEST_CASE("power tail hand values") {
    const auto t = TailFunction::power(1.0, 2.0);
    CHECK(t(3.0) == 0.0625);
    CHECK(t(0.0) == 1.0);
    CHECK(t(1e12) < 1e-20);
}

TEST_CASE("every family is nonincreasing and vanishes at infinity") {
    const auto grid = logGrid(1e-6, 1e12, 400);
    for (const auto& t : families()) {
        INFO(t.family());
        double prev = t(0.0);
        for (double u : grid) {
            const double v = t(u);
            CHECK(v <= prev);
            CHECK(v >= 0.0);
            prev = v;
        }
        CHECK(t(1e300) < 1e-2);
    }
}

TEST_CASE("parameter validation") {
    CHECK_THROWS_AS(TailFunction::power(0.0, 2.0), PreconditionError);
    CHECK_THROWS_AS(TailFunction::weibull(1.0, 0.0, 1.0, 1.0), PreconditionError);
    CHECK_THROWS_AS(TailFunction::weibull(1.0, 0.0, 0.0, 0.5), PreconditionError);
    CHECK_THROWS_AS(TailFunction::tabulated({0.0, 1.0}, {1.0, 2.0}), PreconditionError);
    CHECK_THROWS_AS(TailFunction::tabulated({1.0, 1.0}, {1.0, 0.5}), PreconditionError);
    CHECK_THROWS_AS(TailFunction::tabulated({0.0, 1.0}, {1.0, 0.0}), PreconditionError);
    CHECK_THROWS_AS(TailFunction::power(1.0, 2.0)(-1.0), PreconditionError);
}

TEST_CASE("tabulated hull and extrapolation") {
    const auto strict = TailFunction::tabulated({1.0, 10.0, 100.0}, {1.0, 0.1, 0.01});
    CHECK(strict(10.0) == Approx(0.1).epsilon(1e-14));
    // exact on a power law between nodes
    CHECK(strict(31.622776601683793) == Approx(std::pow(31.622776601683793, -1.0)).epsilon(1e-13));
    CHECK_THROWS_AS(strict(1000.0), PreconditionError);
    CHECK_THROWS_AS(strict(0.5), PreconditionError);
    const auto ext = TailFunction::tabulated({1.0, 10.0, 100.0}, {1.0, 0.1, 0.01}, Extrapolation::PowerLaw);
    CHECK(ext(1000.0) == Approx(1e-3).epsilon(1e-12));
    CHECK(ext(0.5) == 1.0);
    // a cell starting at the origin is exponential-exact
    const auto ex = TailFunction::tabulated({0.0, 2.0}, {1.0, std::exp(-2.0)});
    CHECK(ex(0.7) == Approx(std::exp(-0.7)).epsilon(1e-14));
}

TEST_CASE("zero tail") {
    const auto z = TailFunction::zero();
    CHECK(z.isZero());
    CHECK(z(5.0) == 0.0);
    CHECK(z.integral(5.0) == 0.0);
    CHECK(z.logEval(1.0) == -std::numeric_limits<double>::infinity());
}

TEST_CASE("weibull cap keeps the tail bounded") {
    const auto neg = TailFunction::weibull(1.0, -2.0, 1.0, 0.5);
    CHECK(neg.capPoint() == 1.0);
    CHECK(neg(0.01) == neg(1.0));
    CHECK(neg.density(0.5) == 0.0);
    const auto pos = TailFunction::weibull(1.0, 1.0, 1.0, 0.5);
    CHECK(pos.capPoint() == Approx(4.0));
    CHECK(pos(0.0) == Approx(4.0 * std::exp(-2.0)));
}

TEST_CASE("inverse density and integral agree with evaluation") {
    for (const auto& t : families()) {
        INFO(t.family());
        for (double x : {0.3, 2.0, 17.0, 75.0}) {
            const double y = t(x);
            if (y > 0.0 && y < t(0.0)) CHECK(t.inverse(y) == Approx(x).epsilon(1e-8));
            const double h = 1e-5 * x;
            const double fd = (t(x - h) - t(x + h)) / (2 * h);
            if (std::abs(x - t.capPoint()) > 1e-3 && std::fmod(x, 0.5) != 0.0)
                CHECK(t.density(x) == Approx(fd).epsilon(1e-5).margin(1e-14));
        }
    }
    CHECK(TailFunction::power(1.0, 2.0).integral(3.0) == Approx(0.75).epsilon(1e-15));
    CHECK(TailFunction::power(2.0, 1.0).integral(3.0) == Approx(2.0 * std::log(4.0)).epsilon(1e-15));
    CHECK(TailFunction::weibull(1.0, 0.0, 1.0, 0.5).integral(9.0) == Approx(kWeibullIntegral9).epsilon(1e-10));
    // incomplete-gamma route vs brute quadrature, capped forms included
    for (const auto& w : {TailFunction::weibull(1.0, 0.0, 1.0, 0.5), TailFunction::weibull(2.0, 1.5, 0.7, 0.8),
                          TailFunction::weibull(1.0, -0.5, 1.0, 0.5), TailFunction::weibull(1.0, 0.0, 2.0, 0.95)}) {
        for (double v : {0.2, 1.0, 3.0, 40.0, 500.0}) {
            QuadOptions opt;
            opt.relTol = 1e-12;
            double q = adaptiveGK([&](double x) { return w(x); }, 0.0, std::min(v, w.capPoint()), opt).value;
            if (v > w.capPoint()) q += adaptiveGK([&](double x) { return w(x); }, w.capPoint(), v, opt).value;
            CHECK(w.integral(v) == Approx(q).epsilon(1e-9));
        }
    }
}

TEST_CASE("positive decrease") {
    const auto grid = logGrid(1.0, 1e10, 60);
    const auto pw = classDiagnostic(TailFunction::power(1.0, 2.0), ClassId::PD, 2.0, grid);
    CHECK(pw.verdict == Verdict::Pass);
    // ((1+u)/(1+2u))^2 decreases to 2^-2
    for (auto [u, r] : pw.ratioCurve) {
        CHECK(r == Approx(std::pow((1.0 + u) / (1.0 + 2.0 * u), 2.0)).epsilon(1e-13));
        if (u >= 1e4) CHECK(r == Approx(0.25).epsilon(1e-4));
    }
    const auto lf = classDiagnostic(TailFunction::logForm(1.0), ClassId::PD, 2.0, grid);
    CHECK(lf.verdict == Verdict::Fail);
    CHECK(lf.ratioCurve.back().second == Approx(kLogRatio1e10).epsilon(1e-12));
    // approaches 1 from below over the upper half of the grid
    for (std::size_t i = lf.ratioCurve.size() / 2; i < lf.ratioCurve.size(); ++i) {
        CHECK(lf.ratioCurve[i].second >= lf.ratioCurve[i - 1].second);
        CHECK(lf.ratioCurve[i].second < 1.0);
    }
    CHECK(classDiagnostic(TailFunction::weibull(1.0, 0.0, 1.0, 0.5), ClassId::PD, 2.0, grid).verdict == Verdict::Pass);
}

TEST_CASE("O-regular variation and long tails") {
    const auto grid = logGrid(1.0, 1e6, 60);
    CHECK(classDiagnostic(TailFunction::power(1.0, 2.0), ClassId::OR, 2.0, grid).verdict == Verdict::Pass);
    const auto w = TailFunction::weibull(1.0, 0.0, 1.0, 0.5);
    CHECK(classDiagnostic(w, ClassId::OR, 2.0, grid).verdict == Verdict::Fail);
    const auto l = classDiagnostic(w, ClassId::L, 1.0, grid);
    CHECK(l.verdict == Verdict::Pass);
    CHECK(l.ratioCurve.back().second == Approx(kWeibullShift1e6).epsilon(1e-12));
}

TEST_CASE("short grids are inconclusive rather than errors") {
    const auto grid = logGrid(1.0, 100.0, 20);
    const auto v = classDiagnostic(TailFunction::power(1.0, 2.0), ClassId::PD, 2.0, grid);
    CHECK(v.verdict == Verdict::Inconclusive);
    CHECK(v.ratioCurve.size() == 20);
}

TEST_CASE("regular variation index") {
    for (double rho : {0.5, 1.0, 2.0, 3.0}) {
        const auto t = tailIndexEstimate(TailFunction::power(1.0, rho), logGrid(1.0, 1e8, 80));
        CHECK(t.rvIndex == Approx(-rho).margin(0.05));
    }
    const auto p2 = tailIndexEstimate(TailFunction::power(1.0, 2.0), logGrid(1.0, 1e8, 80));
    CHECK(p2.rvIndex == Approx(-2.0).margin(0.02));
    CHECK(p2.matuszewskaUpper == Approx(-2.0).margin(0.02));
    const auto w = tailIndexEstimate(TailFunction::weibull(1.0, 0.0, 1.0, 0.5), logGrid(1.0, 1e8, 80));
    CHECK(w.matuszewskaUpper == -std::numeric_limits<double>::infinity());
    // slowly varying: slope ~ 1/log u, needs astronomically wide grids
    const auto lg = tailIndexEstimate(TailFunction::logForm(1.0), logGrid(1.0, 1e40, 80));
    CHECK(lg.rvIndex == Approx(0.0).margin(0.02));
    const auto rv = classDiagnostic(TailFunction::power(1.0, 2.0), ClassId::RV, 2.0, logGrid(1.0, 1e8, 80));
    CHECK(rv.verdict == Verdict::Pass);
    CHECK(*rv.estimatedIndex == Approx(-2.0).margin(1e-6));
}

TEST_CASE("two-fold convolution ratio") {
    const auto pareto = subexpConvolutionDiagnostic(TailFunction::power(1.0, 2.0), 1e3, 10000);
    CHECK(pareto.verdict == Verdict::Pass);
    CHECK(pareto.ratioCurve.back().second >= 1.9);
    CHECK(pareto.ratioCurve.back().second <= 2.1);
    CHECK(pareto.ratioCurve.back().second == Approx(kParetoT1000).epsilon(1e-3));
    CHECK(pareto.ratioCurve.front().first == 0.0);
    CHECK(pareto.ratioCurve.front().second == Approx(1.0).epsilon(1e-12));
    const auto p100 = subexpConvolutionDiagnostic(TailFunction::power(1.0, 2.0), 100.0, 10000);
    CHECK(p100.ratioCurve.back().second == Approx(kParetoT100).epsilon(1e-3));

    std::vector<double> x, r;
    for (int i = 0; i <= 10000; ++i) {
        x.push_back(0.01 * i);
        r.push_back(std::exp(-0.01 * i));
    }
    const auto ex = TailFunction::tabulated(x, r);
    const auto e = subexpConvolutionDiagnostic(ex, 50.0, 100000);
    CHECK(e.verdict == Verdict::Fail);
    for (auto [u, T] : e.ratioCurve) CHECK(T == Approx(1.0 + u).epsilon(1e-4));
    CHECK(e.ratioCurve.back().second == Approx(51.0).epsilon(1e-4));
}

TEST_CASE("convolution ratio lower bounds") {
    for (const auto& t : families()) {
        INFO(t.family());
        const double uMax = t.family() == "tabulated" ? 60.0 : 500.0;
        const auto v = subexpConvolutionDiagnostic(t, uMax, 4000);
        for (std::size_t i = 0; i < v.ratioCurve.size(); ++i) {
            const auto [u, T] = v.ratioCurve[i];
            if (!std::isfinite(T)) continue;
            const double tol = v.errorCurve[i] + 1e-9;
            CHECK(T >= 1.0 - tol);
            CHECK(T >= 2.0 - std::min(1.0, t(u)) - tol);
        }
    }
}

TEST_CASE("coarse mesh is inconclusive") {
    // exponential tail with h = 0.05: the mesh-halving estimate exceeds the tolerance
    std::vector<double> x{0.0, 200.0}, r{1.0, std::exp(-200.0)};
    const auto v = subexpConvolutionDiagnostic(TailFunction::tabulated(x, r), 50.0, 1000);
    CHECK(v.verdict == Verdict::Inconclusive);
    CHECK_THROWS_AS(subexpConvolutionDiagnostic(TailFunction::power(1.0, 2.0), 10.0, 100), PreconditionError);
}
