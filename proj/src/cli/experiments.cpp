#include "ovl/cli.hpp"
#include "ovl/errors.hpp"
#include "ovl/mc.hpp"
#include "ovl/tailkit.hpp"

#include <charconv>
#include <cmath>
#include <optional>
#include <sstream>

namespace ovl::cli {

using nlohmann::json;

std::string formatDouble(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

namespace {

// RFC 4180 with shortest round-trip numbers; empty cells mean "undefined".
class Csv {
public:
    explicit Csv(std::vector<std::string> header) : cols_(header.size()) { line(header); }

    Csv& operator<<(double v) { return cell(formatDouble(v)); }
    Csv& operator<<(std::uint64_t v) { return cell(std::to_string(v)); }
    Csv& operator<<(unsigned v) { return cell(std::to_string(v)); }
    Csv& operator<<(bool v) { return cell(v ? "true" : "false"); }
    Csv& operator<<(const char* s) { return cell(quote(s)); }
    Csv& operator<<(const std::string& s) { return cell(quote(s)); }
    Csv& operator<<(std::optional<double> v) { return cell(v ? formatDouble(*v) : ""); }

    std::string str() const {
        if (!row_.empty()) throw InvariantError("csv row left incomplete");
        return out_;
    }

private:
    Csv& cell(std::string s) {
        row_.push_back(std::move(s));
        if (row_.size() == cols_) {
            line(row_);
            row_.clear();
        }
        return *this;
    }

    void line(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) out_ += (i ? "," : "") + cells[i];
        out_ += '\n';
    }

    static std::string quote(const std::string& s) {
        if (s.find_first_of(",\"\n") == std::string::npos) return s;
        std::string q = "\"";
        for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
        return q + "\"";
    }

    std::size_t cols_;
    std::vector<std::string> row_;
    std::string out_;
};

std::vector<double> doubles(const json& j) { return j.get<std::vector<double>>(); }

SimulationSpec simulation(const json& c) {
    SimulationSpec s;
    s.kappa = c.at("kappa").get<double>();
    s.ratio = c.at("ratio").get<double>();
    s.windowSteps = c.at("windowSteps").get<unsigned>();
    s.gridLevel = c.at("gridLevel").get<unsigned>();
    s.epsilonFactor = c.at("epsilonFactor").get<double>();
    s.maxExpectedJumps = c.at("maxExpectedJumps").get<double>();
    return s;
}

std::vector<Artifact> rCurve(const json& c) {
    const ProcessModel m = modelFromJson(c.at("model"));
    const bool closed = c.at("method").get<std::string>() == "closed";
    Csv csv({"u", "R", "quadError"});
    for (double u : doubles(c.at("uList"))) {
        const RValue r = closed ? rStableClosed(m, u) : rNumeric(m, u);
        csv << u << r.value << r.quadError;
    }
    return {{"r_curve.csv", csv.str()}};
}

std::vector<Artifact> laplaceCheck(const json& c) {
    const ProcessModel m = modelFromJson(c.at("model"));
    const SigmaProfile p = sigmaProfile(m);
    Csv csv({"u", "R_numeric", "R_laplace", "rel_diff", "log_R_numeric", "log_R_laplace", "quadError"});
    double prefactor = 0.0;
    for (double u : doubles(c.at("uList"))) {
        const RValue r = rNumeric(m, u);
        const LaplaceValue l = rLaplace(m, u);
        prefactor = l.prefactor;
        csv << u << r.value << l.value << std::expm1(l.logValue - r.logRaw) << r.logRaw << l.logValue << r.quadError;
    }
    Csv k({"sHat", "sigma", "curvature", "prefactor"});
    k << p.sHat << p.sigmaMin << p.curvature << prefactor;
    return {{"laplace.csv", csv.str()}, {"laplace_constants.csv", k.str()}};
}

std::vector<Artifact> selfsimCheck(const json& c) {
    const ProcessModel m = modelFromJson(c.at("model"));
    const double a = c.at("a").get<double>();
    const auto th = doubles(c.at("thetas")), ts = doubles(c.at("ts"));
    Csv csv({"label", "a", "scaling_index", "max_discrepancy", "max_quad_error"});
    const SelfSimReport nominal = selfSimilarityCheck(m, a, th, ts);
    csv << "nominal" << a << m.H() << nominal.maxDiscrepancy << nominal.maxQuadError;
    const double d = c.at("perturbation").get<double>();
    if (d != 0.0) {
        const SelfSimReport pert = selfSimilarityCheck(m, a, th, ts, m.H() + d);
        csv << "perturbed" << a << m.H() + d << pert.maxDiscrepancy << pert.maxQuadError;
    }
    return {{"selfsim.csv", csv.str()}};
}

std::vector<Artifact> tailClasses(const json& c) {
    const TailFunction tail = tailFromJson(c.at("tail"));
    DiagnosticThresholds th;
    th.pd = c.at("deltaPD").get<double>();
    th.orr = c.at("deltaOR").get<double>();
    th.l = c.at("deltaL").get<double>();
    th.s = c.at("deltaS").get<double>();
    const auto grid = logGrid(c.at("uMin").get<double>(), c.at("uMax").get<double>(), c.at("points").get<std::size_t>());
    const double lambda = c.at("lambda").get<double>(), lambdaL = c.at("lambdaL").get<double>();

    Csv csv({"class", "lambda", "verdict", "tail_end_ratio", "estimated_index", "diagnostics"});
    auto add = [&](const ClassVerdict& v, double lam) {
        csv << className(v.classId) << lam << verdictName(v.verdict)
            << (v.ratioCurve.empty() ? std::optional<double>{} : v.ratioCurve.back().second) << v.estimatedIndex
            << v.diagnostics;
    };
    for (ClassId id : {ClassId::PD, ClassId::OR, ClassId::RV}) add(classDiagnostic(tail, id, lambda, grid, th), lambda);
    add(classDiagnostic(tail, ClassId::L, lambdaL, grid, th), lambdaL);
    const ClassVerdict s = subexpConvolutionDiagnostic(tail, c.at("convolutionUMax").get<double>(),
                                                       c.at("meshN").get<std::size_t>(), th);
    add(s, 2.0);

    Csv curve({"u", "T", "mesh_error"});
    for (std::size_t i = 0; i < s.ratioCurve.size(); ++i)
        curve << s.ratioCurve[i].first << s.ratioCurve[i].second
              << (i < s.errorCurve.size() ? std::optional<double>(s.errorCurve[i]) : std::nullopt);

    const TailIndex ti = tailIndexEstimate(tail, grid, th);
    Csv idx({"rv_index", "matuszewska_upper"});
    idx << ti.rvIndex << ti.matuszewskaUpper;
    return {{"classes.csv", csv.str()}, {"convolution.csv", curve.str()}, {"tail_index.csv", idx.str()}};
}

OverloadKind eventKind(const std::string& s) {
    if (s == "sup") return OverloadKind::WindowSup;
    if (s == "inf") return OverloadKind::WindowInf;
    return OverloadKind::Point;
}

std::vector<Artifact> overload(const json& c) {
    const ProcessModel m = modelFromJson(c.at("model"));
    const SimulationSpec spec = simulation(c);
    const auto n = c.at("n").get<std::uint64_t>();
    const auto seed = c.at("seed").get<std::uint64_t>();
    const double t = c.at("t").get<double>();
    const OverloadKind kind = eventKind(c.at("event").get<std::string>());
    const bool stability = c.at("stabilityCheck").get<bool>();

    std::vector<Variant> variants{{spec.kappa, spec.gridLevel}};
    if (stability) {
        variants.push_back({2.0 * spec.kappa, spec.gridLevel});
        variants.push_back({spec.kappa, spec.gridLevel + 1});
    }
    std::vector<std::string> head{"u", "t", "event", "n", "k", "p", "ci_lo", "ci_hi",
                                  "horizon", "kappa", "grid_level", "grid_points"};
    if (stability)
        for (const char* h : {"p_kappa2", "p_grid2", "half_width", "stable"}) head.push_back(h);
    Csv csv(head);
    std::vector<OverloadEstimate> est;
    for (double u : doubles(c.at("uList"))) {
        const LevelCounts lc = simulateLevel(m, u, t, n, seed, spec, variants);
        const OverloadEstimate e = makeEstimate(kind, lc, 0, seed);
        est.push_back(e);
        csv << u << t << overloadKindName(kind) << e.trials << e.hits << e.p << e.ci.lo << e.ci.hi << e.horizon
            << e.kappa << e.gridLevel << std::uint64_t(e.gridPoints);
        if (stability) {
            const double pk = makeEstimate(kind, lc, 1, seed).p, pg = makeEstimate(kind, lc, 2, seed).p;
            const double half = 0.5 * (e.ci.hi - e.ci.lo);
            csv << pk << pg << half << (std::fabs(pk - e.p) < half && std::fabs(pg - e.p) < half);
        }
    }
    std::vector<Artifact> out{{"overload.csv", csv.str()}};
    std::size_t positive = 0;
    for (const auto& e : est) positive += e.hits > 0;
    if (positive >= 3) {
        const SlopeFit f = tailSlopeFit(est);
        Csv s({"slope", "stderr", "intercept", "curvature", "curvature_stderr", "power_law"});
        s << f.slope << f.stderr_ << f.intercept << f.curvature << f.curvatureStderr << f.powerLaw;
        out.push_back({"slope.csv", s.str()});
    }
    return out;
}

std::vector<Artifact> piterbarg(const json& c) {
    const ProcessModel m = modelFromJson(c.at("model"));
    const SimulationSpec spec = simulation(c);
    const json& w = c.at("window");
    WindowRule rule;
    if (w.at("rule").get<std::string>() == "constant") {
        rule.t = w.at("t").get<double>();
    } else {
        rule.kind = WindowRule::Kind::Power;
        rule.c0 = w.at("c0").get<double>();
        rule.delta = w.at("delta").get<double>();
    }
    const PiterbargReport rep = piterbargExperiment(m, doubles(c.at("uList")), rule, c.at("n").get<std::uint64_t>(),
                                                    c.at("seed").get<std::uint64_t>(), spec);
    Csv csv({"u", "t", "n", "k_point", "k_sup", "k_inf", "p_point", "p_sup", "p_inf", "ratio_sup", "ratio_sup_lo",
             "ratio_sup_hi", "ratio_strong", "ratio_strong_lo", "ratio_strong_hi"});
    auto ratio = [&](const RatioEstimate& r) {
        csv << r.value << (r.value ? std::optional<double>(r.ci.lo) : std::nullopt)
            << (r.value ? std::optional<double>(r.ci.hi) : std::nullopt);
    };
    for (const auto& r : rep.rows) {
        csv << r.u << r.t << r.n << r.kPoint << r.kSup << r.kInf << r.pPoint << r.pSup << r.pInf;
        ratio(r.ratioSup);
        ratio(r.ratioStrong);
    }
    Csv sum({"regime", "window_exponent", "ratio_sup_nonincreasing", "kappa", "grid_level", "surrogate_u",
             "surrogate_t", "surrogate_ratio", "surrogate_predicted", "surrogate_absent", "note"});
    sum << regimeName(rep.regime.verdict) << rep.regime.windowExponent << rep.ratioSupNonincreasing << spec.kappa
        << spec.gridLevel;
    if (rep.surrogate) {
        const auto& s = *rep.surrogate;
        sum << s.u << s.t << s.ratio << s.predicted << s.absent << s.note;
    } else {
        sum << std::optional<double>{} << std::optional<double>{} << std::optional<double>{} << std::optional<double>{}
            << "" << rep.regime.statement;
    }
    return {{"piterbarg.csv", csv.str()}, {"piterbarg_summary.csv", sum.str()}};
}

std::string regimeTable(const RegimeSweep& sweep) {
    Csv csv({"H", "gamma", "verdict", "gamma1", "gamma2", "gamma3", "window_exponent", "boundary", "message"});
    for (const auto& r : emitRegimeTable(sweep)) {
        const bool rejected = r.verdict.verdict == RegimeOutcome::Rejected;
        csv << r.H << r.gamma << regimeName(r.verdict.verdict)
            << (rejected ? std::optional<double>{} : std::optional<double>(r.verdict.gamma1)) << r.verdict.gamma2
            << r.verdict.gamma3 << r.verdict.windowExponent << r.boundary
            << (r.message.empty() ? r.verdict.statement : r.message);
    }
    return csv.str();
}

std::vector<Artifact> regime(const json& c) {
    RegimeSweep s;
    s.family = c.at("family").get<std::string>();
    s.alphaW = c.at("alphaW").get<double>();
    s.rho = c.at("rho").get<double>();
    s.H = doubles(c.at("H"));
    s.gamma = doubles(c.at("gamma"));
    return {{"regime.csv", regimeTable(s)}};
}

std::vector<Artifact> shiftedRatio(const json& c) {
    const ProcessModel m = modelFromJson(c.at("model"));
    const double t = c.at("t").get<double>();
    std::optional<double> predicted;
    try {
        predicted = piterbargLimitRatio(m, t);
    } catch (const PreconditionError&) {
    }
    Csv csv({"u", "t", "ratio", "predicted", "log_Rt", "log_R", "quadError"});
    for (double u : doubles(c.at("uList"))) {
        const ShiftedValue v = rShiftedNumeric(m, t, u);
        csv << u << t << v.ratio << predicted << v.logRt << v.logR << v.quadError;
    }
    return {{"shifted.csv", csv.str()}};
}

std::vector<double> parseList(const std::string& axis, const std::string& text) {
    std::vector<double> xs;
    auto number = [&](const std::string& s) {
        double v = 0.0;
        const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
        if (res.ec != std::errc() || res.ptr != s.data() + s.size())
            throw ConfigError("--grid: bad number \"" + s + "\" for " + axis);
        return v;
    };
    if (text.find(':') != std::string::npos) {
        std::vector<std::string> p;
        std::stringstream ss(text);
        for (std::string s; std::getline(ss, s, ':');) p.push_back(s);
        if (p.size() != 3) throw ConfigError("--grid: range for " + axis + " must be lo:hi:count");
        const double lo = number(p[0]), hi = number(p[1]), cnt = number(p[2]);
        if (!(cnt >= 1) || cnt != std::floor(cnt)) throw ConfigError("--grid: count for " + axis + " must be >= 1");
        for (int i = 0; i < int(cnt); ++i) xs.push_back(cnt == 1 ? lo : lo + (hi - lo) * i / (cnt - 1));
    } else {
        std::stringstream ss(text);
        for (std::string s; std::getline(ss, s, ',');) xs.push_back(number(s));
    }
    if (xs.empty()) throw ConfigError("--grid: empty list for " + axis);
    return xs;
}

} // namespace

std::vector<Artifact> runResolved(const json& c) {
    const std::string kind = c.at("kind").get<std::string>();
    if (kind == "r-curve") return rCurve(c);
    if (kind == "laplace-check") return laplaceCheck(c);
    if (kind == "selfsim-check") return selfsimCheck(c);
    if (kind == "tail-classes") return tailClasses(c);
    if (kind == "overload") return overload(c);
    if (kind == "piterbarg") return piterbarg(c);
    if (kind == "regime") return regime(c);
    if (kind == "shifted-ratio") return shiftedRatio(c);
    throw ConfigError("key \"kind\": unknown experiment \"" + kind + "\"");
}

std::string regimeCsv(const std::string& family, const std::string& grid, double alphaW, double rho) {
    RegimeSweep s;
    s.family = family;
    s.alphaW = alphaW;
    s.rho = rho;
    std::stringstream ss(grid);
    bool haveH = false, haveG = false;
    for (std::string part; std::getline(ss, part, ';');) {
        const auto eq = part.find('=');
        if (eq == std::string::npos) throw ConfigError("--grid: expected axis=values, got \"" + part + "\"");
        const std::string axis = part.substr(0, eq);
        if (axis == "H") {
            s.H = parseList(axis, part.substr(eq + 1));
            haveH = true;
        } else if (axis == "gamma") {
            s.gamma = parseList(axis, part.substr(eq + 1));
            haveG = true;
        } else {
            throw ConfigError("--grid: unknown axis \"" + axis + "\"");
        }
    }
    if (!haveH || !haveG) throw ConfigError("--grid needs both H= and gamma=");
    return regimeTable(s);
}

} // namespace ovl::cli
