// Acceptance suite: one PASS/FAIL line per criterion. Runs everything by
// default, a single criterion with --criterion N. Exit status is nonzero when
// any selected criterion fails.
#include "ovl/cli.hpp"
#include "ovl/errors.hpp"
#include "ovl/mc.hpp"
#include "ovl/pathgen.hpp"
#include "ovl/rng.hpp"
#include "ovl/simd.hpp"
#include "ovl/tailkit.hpp"

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>
#include <string>

using namespace ovl;
namespace fs = std::filesystem;

namespace {

// stable input of the overload and Piterbarg criteria
constexpr double kAlpha = 1.5;
constexpr std::uint64_t kPaths = 200'000;

// 1
constexpr double kSlopeTarget = -0.5, kSlopeTol = 0.08;
constexpr double kConstLo = 0.7, kConstHi = 1.3;
// 2
constexpr double kLaplaceTol = 0.05;
constexpr double kPrefactorPaper = 2.981;
constexpr double kConstTol = 1e-12;
// 3
constexpr double kShiftPaper = 2.9185, kShiftTol = 0.10, kShiftFloor = 2.0;
// 4
constexpr double kRatioSupHi = 1.3, kRatioStrongHi = 1.35;
// 5
constexpr double kSelfSimTol = 1e-6, kPerturbFloor = 1e-2, kPerturbation = 0.05;
// 6
constexpr double kRvTol = 1e-6, kRvRatioLo = 0.9, kRvRatioHi = 1.1;
// 7
constexpr double kConvLo = 1.9, kConvHi = 2.1, kExpRel = 1e-4;
// 8
constexpr double kLambdaPaper = 1.4888, kJumpTol = 0.02, kMeanSigmas = 3.0, kStableTailTol = 0.15;

struct Result {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
    char buf[1024];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return buf;
}

ProcessModel stableModel() { return ProcessModel::stable(kAlpha, 0.0, 1.0, 1.0); }
ProcessModel weibullModel(double gamma) {
    return ProcessModel::additive(0.5, TailFunction::weibull(1.0, 0.0, 1.0, 0.5), {}, 1.0, gamma);
}

Result criterion1() {
    const auto m = stableModel();
    std::vector<OverloadEstimate> est;
    std::string d;
    for (double u : {30.0, 100.0, 300.0, 1000.0}) {
        est.push_back(estimateOverload(m, OverloadKind::Point, u, 0.0, kPaths, SimulationSpec{}, 1001));
        d += fmt("p(%g)=%.5f ", u, est.back().p);
    }
    const SlopeFit f = tailSlopeFit(est);
    const double c = est.back().p / std::pow(1000.0, -0.5);
    const bool a = std::fabs(f.slope - kSlopeTarget) <= kSlopeTol, b = c >= kConstLo && c <= kConstHi;
    return {a && b, d + fmt("slope=%.4f (target %.2f +- %.2f) p/u^-1/2 at 1000=%.4f (in [%.1f, %.1f])", f.slope,
                            kSlopeTarget, kSlopeTol, c, kConstLo, kConstHi)};
}

Result criterion2() {
    const auto m = weibullModel(1.0);
    const RValue q = rNumeric(m, 1e4);
    const LaplaceValue l = rLaplace(m, 1e4);
    const SigmaProfile p = sigmaProfile(m);
    const double rel = std::fabs(std::expm1(l.logValue - q.logRaw));
    const bool consts = std::fabs(p.sHat - 1.0) < kConstTol && std::fabs(p.sigmaMin - 2.0) < kConstTol &&
                        std::fabs(p.curvature - 0.5) < kConstTol;
    // four significant digits: 2.981 after rounding
    const bool pref = std::fabs(std::round(l.prefactor * 1000.0) / 1000.0 - kPrefactorPaper) < 1e-9;
    return {rel <= kLaplaceTol && consts && pref,
            fmt("|Laplace/quadrature-1|=%.3e (<= %.2f) sHat=%.12g sigma=%.12g sigma''=%.12g prefactor=%.6f (4 digits %.3f)",
                rel, kLaplaceTol, p.sHat, p.sigmaMin, p.curvature, l.prefactor, kPrefactorPaper)};
}

Result criterion3() {
    const auto m = weibullModel(3.0);
    const ShiftedValue s = rShiftedNumeric(m, 1.0, 1e6);
    const double closed = piterbargLimitRatio(m, 1.0);
    const double dev = std::fabs(s.ratio / kShiftPaper - 1.0);
    const bool absent = s.ratio > kShiftFloor;
    return {dev <= kShiftTol && absent,
            fmt("R_t/R at u=1e6 = %.6f, target %.4f (closed form %.6f): deviation %.1f%% (<= %.0f%%); > %.0f: %s",
                s.ratio, kShiftPaper, closed, 100.0 * dev, 100.0 * kShiftTol, kShiftFloor, absent ? "yes" : "no")};
}

Result criterion4() {
    const auto rep = piterbargExperiment(stableModel(), {50.0, 200.0, 800.0}, WindowRule{}, kPaths, 1004, SimulationSpec{});
    std::string d;
    for (const auto& r : rep.rows)
        d += fmt("u=%g sup/point=%.4f [%.4f, %.4f] sup/inf=%.4f; ", r.u, r.ratioSup.value.value_or(NAN), r.ratioSup.ci.lo,
                 r.ratioSup.ci.hi, r.ratioStrong.value.value_or(NAN));
    const auto& last = rep.rows.back();
    const bool ok = last.ratioSup.value && *last.ratioSup.value >= 1.0 && *last.ratioSup.value <= kRatioSupHi &&
                    last.ratioStrong.value && *last.ratioStrong.value <= kRatioStrongHi && rep.ratioSupNonincreasing;
    return {ok, d + fmt("nonincreasing within CI: %s (bounds %.2f, %.2f)", rep.ratioSupNonincreasing ? "yes" : "no",
                        kRatioSupHi, kRatioStrongHi)};
}

Result criterion5() {
    const std::vector<double> th{0.5, 1.0, 2.0}, ts{0.5, 1.0, 2.0};
    const auto st = stableModel();
    const auto ad = ProcessModel::additive(0.5, TailFunction::power(1.0, 3.0), {}, 1.0, 1.0);
    const double ds = selfSimilarityCheck(st, 2.0, th, ts).maxDiscrepancy;
    const double da = selfSimilarityCheck(ad, 2.0, th, ts).maxDiscrepancy;
    const double ps = selfSimilarityCheck(st, 2.0, th, ts, st.H() + kPerturbation).maxDiscrepancy;
    const double pa = selfSimilarityCheck(ad, 2.0, th, ts, ad.H() + kPerturbation).maxDiscrepancy;
    return {ds < kSelfSimTol && da < kSelfSimTol && ps > kPerturbFloor && pa > kPerturbFloor,
            fmt("stable %.2e additive %.2e (< %.0e); H+%.2f detector stable %.3e additive %.3e (> %.0e)", ds, da,
                kSelfSimTol, kPerturbation, ps, pa, kPerturbFloor)};
}

Result criterion6() {
    const auto m = ProcessModel::additive(0.5, TailFunction::power(1.0, 3.0), {}, 1.0, 1.0);
    const RvConstant c = rAsymptoticRV(m);
    const double ratio = rNumeric(m, 100.0).value / (c.C * m.rPlus()(100.0));
    const double dev = std::fabs(c.C - std::numbers::pi / 16.0);
    return {dev <= kRvTol && ratio >= kRvRatioLo && ratio <= kRvRatioHi,
            fmt("C_RV=%.12f vs pi/16=%.12f (|diff| %.1e <= %.0e); R(100)/(C r(100))=%.5f (in [%.1f, %.1f])", c.C,
                std::numbers::pi / 16.0, dev, kRvTol, ratio, kRvRatioLo, kRvRatioHi)};
}

Result criterion7() {
    const auto grid = logGrid(1.0, 1e10, 60);
    const auto pw = TailFunction::power(1.0, 2.0);
    const bool pd = classDiagnostic(pw, ClassId::PD, 2.0, grid).verdict == Verdict::Pass;
    const bool orr = classDiagnostic(pw, ClassId::OR, 2.0, grid).verdict == Verdict::Pass;
    const auto s = subexpConvolutionDiagnostic(pw, 1e3, 10000);
    const double T = s.ratioCurve.back().second;
    const bool sOk = s.verdict == Verdict::Pass && T >= kConvLo && T <= kConvHi;

    std::vector<double> x, r;
    for (int i = 0; i <= 10000; ++i) {
        x.push_back(0.01 * i);
        r.push_back(std::exp(-0.01 * i));
    }
    const auto e = subexpConvolutionDiagnostic(TailFunction::tabulated(x, r), 50.0, 100000);
    double worst = 0.0;
    for (auto [u, t] : e.ratioCurve) worst = std::max(worst, std::fabs(t / (1.0 + u) - 1.0));
    const double T50 = e.ratioCurve.back().second;
    const bool eOk = e.verdict == Verdict::Fail && worst <= kExpRel && std::fabs(T50 / 51.0 - 1.0) <= kExpRel;

    const auto w = TailFunction::weibull(1.0, 0.0, 1.0, 0.5);
    const bool wpd = classDiagnostic(w, ClassId::PD, 2.0, grid).verdict == Verdict::Pass;
    const bool wl = classDiagnostic(w, ClassId::L, 1.0, grid).verdict == Verdict::Pass;
    const bool wor = classDiagnostic(w, ClassId::OR, 2.0, grid).verdict == Verdict::Fail;
    return {pd && orr && sOk && eOk && wpd && wl && wor,
            fmt("power: PD %s OR %s S %s T(1e3)=%.4f; exponential: S %s T(50)=%.5f max|T/(1+u)-1|=%.1e; Weibull: PD %s "
                "L %s OR %s",
                pd ? "pass" : "FAIL", orr ? "pass" : "FAIL", verdictName(s.verdict), T, verdictName(e.verdict), T50,
                worst, wpd ? "pass" : "FAIL", wl ? "pass" : "FAIL", wor ? "fail (expected)" : "NOT FAILED")};
}

Result criterion8() {
    const auto m = ProcessModel::additive(0.5, TailFunction::power(1.0, 2.0), {}, 1.0, 1.0);
    const AdditivePathGenerator gen(m, 1.0, 0.1);
    const std::size_t n = 100'000;
    double cnt = 0.0, s1 = 0.0, s2 = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        const SamplePath p = gen.sample(deriveSeed(1008, j));
        cnt += double(p.times.size() - 2);
        const double x = pathValue(p, 1.0);
        s1 += x;
        s2 += x * x;
    }
    const double meanJumps = cnt / n, mean = s1 / n, se = std::sqrt((s2 / n - mean * mean) / (n - 1));
    const double lam = gen.expectedJumps();
    const bool jumpsOk = std::fabs(meanJumps / lam - 1.0) <= kJumpTol && std::fabs(lam - kLambdaPaper) < 5e-5;
    const bool meanOk = std::fabs(mean - 1.0) <= kMeanSigmas * se;

    const std::size_t ns = 1'000'000;
    const auto v = sampleStable(kAlpha, 0.0, 1.0, ns, 1018);
    const double x0 = 20.0;
    std::size_t over = 0;
    for (double z : v) over += z > x0;
    const double tail = double(over) / ns * std::pow(x0, kAlpha), target = stableConstant(kAlpha) / 2.0;
    const bool tailOk = std::fabs(tail / target - 1.0) <= kStableTailTol;
    return {jumpsOk && meanOk && tailOk,
            fmt("jumps %.5f vs Lambda %.6f (paper %.4f, within %.0f%%); E X(1)=%.5f +- %.5f (3 stderr of 1); stable "
                "x^a P(S>x) at x=%g: %.5f vs C_a/2=%.5f (within %.0f%%)",
                meanJumps, lam, kLambdaPaper, 100.0 * kJumpTol, mean, se, x0, tail, target, 100.0 * kStableTailTol)};
}

// Base resolution and calibrated horizon against doubled horizon and doubled
// resolution, on shared paths; every estimate the overload and Piterbarg
// criteria report.
Result criterion9(std::vector<std::string>& info) {
    const auto m = stableModel();
    const SimulationSpec spec;
    const double k = spec.kappa;
    const std::vector<Variant> vars{{k, 0}, {2 * k, 0}, {k, 1}, {8, 0}, {16, 0}};
    bool ok = true;
    double worst = 0.0, worstLiteral = 0.0;
    std::string d;
    std::size_t checked = 0;
    auto check = [&](double u, double t, std::uint64_t seed, std::vector<OverloadKind> kinds, bool point0) {
        const LevelCounts lc = simulateLevel(m, u, t, kPaths, seed, spec, vars);
        auto count = [&](std::size_t v, int which) {
            const auto& c = lc.variants[v];
            return which == 0 ? c.point0 : which == 1 ? c.point : which == 2 ? c.sup : c.inf;
        };
        std::vector<int> which;
        if (point0) which.push_back(0);
        for (auto kd : kinds) which.push_back(kd == OverloadKind::Point ? 1 : kd == OverloadKind::WindowSup ? 2 : 3);
        for (int w : which) {
            const double p = double(count(0, w)) / lc.n;
            const Interval ci = wilson(count(0, w), lc.n);
            const double half = 0.5 * (ci.hi - ci.lo);
            const double dk = std::fabs(double(count(1, w)) / lc.n - p), dg = std::fabs(double(count(2, w)) / lc.n - p);
            const double d8 = std::fabs(double(count(4, w)) - double(count(3, w))) / lc.n;
            worst = std::max({worst, dk / half, dg / half});
            worstLiteral = std::max(worstLiteral, d8 / half);
            ok = ok && dk < half && dg < half;
            ++checked;
            if (dk >= half || dg >= half) d += fmt("u=%g event %d moved (%.2e, %.2e vs %.2e); ", u, w, dk, dg, half);
        }
    };
    for (double u : {30.0, 100.0, 300.0, 1000.0}) check(u, 0.0, 1009, {}, true);
    for (double u : {50.0, 200.0, 800.0})
        check(u, 1.0, 1019, {OverloadKind::Point, OverloadKind::WindowSup, OverloadKind::WindowInf}, false);
    info.push_back(fmt("criterion 9 (info): literal horizon 8 -> 16 moves p by up to %.2f CI half-widths; the horizon "
                       "at kappa=8 misses about 1/sqrt(9) of the R mass for this input",
                       worstLiteral));
    return {ok, d + fmt("%zu estimates; kappa %g -> %g and grid level 0 -> 1: largest shift %.2f CI half-widths (< 1)",
                        checked, k, 2 * k, worst)};
}

Result criterion10() {
    const fs::path src = OVL_SOURCE_DIR, scratch = fs::path(OVL_BINARY_DIR) / "acceptance_runs";
    const bool scalar = simd::active().isa == simd::Isa::Scalar;
    auto slurp = [](const fs::path& p) {
        std::ifstream f(p, std::ios::binary);
        std::stringstream ss;
        ss << f.rdbuf();
        return ss.str();
    };
    std::vector<fs::path> cfgs;
    for (const auto& e : fs::directory_iterator(src / "configs"))
        if (e.path().extension() == ".json") cfgs.push_back(e.path());
    std::sort(cfgs.begin(), cfgs.end());
    std::size_t files = 0;
    std::string bad;
    for (const auto& cfg : cfgs) {
        const std::string name = cfg.stem().string();
        const fs::path a = scratch / name / "a", b = scratch / name / "b", r = scratch / name / "replay";
        for (const auto& p : {a, b, r}) fs::remove_all(p);
        const auto oa = cli::runFile(cfg.string(), a.string());
        const auto ob = cli::runFile(cfg.string(), b.string());
        const auto orr = cli::runFile((a / "manifest.json").string(), r.string());
        if (oa.exitCode || ob.exitCode || orr.exitCode) {
            bad += name + " (run failed) ";
            continue;
        }
        const fs::path golden = src / "tests" / "golden" / name;
        for (const auto& e : fs::directory_iterator(golden)) {
            const std::string f = e.path().filename().string(), bytes = slurp(a / f);
            ++files;
            if (slurp(b / f) != bytes || slurp(r / f) != bytes) bad += name + "/" + f + " (rerun differs) ";
            if (scalar && slurp(e.path()) != bytes) bad += name + "/" + f + " (golden differs) ";
        }
    }
    return {bad.empty() && scalar,
            fmt("%zu configs, %zu CSV files: rerun, manifest replay%s byte-identical%s%s", cfgs.size(), files,
                scalar ? " and golden files" : "", scalar ? "" : "; golden comparison needs OVL_SIMD=scalar",
                bad.empty() ? "" : ("; " + bad).c_str())};
}

} // namespace

int main(int argc, char** argv) {
    int only = 0;
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) only = std::atoi(argv[++i]);
    }
    std::vector<std::string> info;
    const std::map<int, std::function<Result()>> table{
        {1, criterion1}, {2, criterion2}, {3, criterion3}, {4, criterion4}, {5, criterion5},
        {6, criterion6}, {7, criterion7}, {8, criterion8}, {9, [&] { return criterion9(info); }}, {10, criterion10}};
    if (only && !table.count(only)) {
        std::fprintf(stderr, "unknown criterion %d\n", only);
        return 2;
    }
    std::printf("kernels: %s\n", simd::isaName(simd::active().isa));
    bool all = true;
    for (const auto& [id, fn] : table) {
        if (only && id != only) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Result r;
        try {
            r = fn();
        } catch (const std::exception& e) {
            r = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("criterion %d: %s  %s  [%.1f s]\n", id, r.pass ? "PASS" : "FAIL", r.detail.c_str(), secs);
        std::fflush(stdout);
        all = all && r.pass;
    }
    for (const auto& s : info) std::printf("%s\n", s.c_str());
    return all ? 0 : 1;
}
