#include "ovl/cli.hpp"
#include "ovl/errors.hpp"

#include "ovl/mc.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <set>

namespace ovl::cli {

using nlohmann::json;

namespace {

// Reads one JSON object, tracks which keys were consumed and records every
// resolved value (defaults included) in `out`.
class Reader {
public:
    Reader(const json& j, std::string where) : j_(j), where_(std::move(where)) {
        if (!j_.is_object()) fail(where_.empty() ? "config" : where_, "must be a JSON object");
    }

    bool has(const std::string& k) const { return j_.contains(k); }

    double num(const std::string& k, std::optional<double> def = {}) {
        const json* v = get(k, def.has_value());
        double x = v ? asNumber(k, *v) : *def;
        out[k] = x;
        return x;
    }

    double positive(const std::string& k, std::optional<double> def = {}) {
        const double x = num(k, def);
        if (!(x > 0.0)) fail(k, "must be positive");
        return x;
    }

    std::uint64_t uint(const std::string& k, std::optional<std::uint64_t> def = {}) {
        const json* v = get(k, def.has_value());
        std::uint64_t x = def.value_or(0);
        if (v) {
            if (v->is_number_unsigned()) x = v->get<std::uint64_t>();
            else if (v->is_number_integer() && v->get<std::int64_t>() >= 0) x = std::uint64_t(v->get<std::int64_t>());
            else if (v->is_number_float() && v->get<double>() >= 0 && v->get<double>() == std::floor(v->get<double>()) &&
                     v->get<double>() < 9.007199254740992e15)
                x = std::uint64_t(v->get<double>());
            else
                fail(k, "must be a non-negative integer");
        }
        out[k] = x;
        return x;
    }

    bool boolean(const std::string& k, bool def) {
        const json* v = get(k, true);
        bool x = def;
        if (v) {
            if (!v->is_boolean()) fail(k, "must be true or false");
            x = v->get<bool>();
        }
        out[k] = x;
        return x;
    }

    std::string str(const std::string& k, std::optional<std::string> def, const std::vector<std::string>& allowed) {
        const json* v = get(k, def.has_value());
        std::string x = def.value_or("");
        if (v) {
            if (!v->is_string()) fail(k, "must be a string");
            x = v->get<std::string>();
        }
        if (!allowed.empty() && std::find(allowed.begin(), allowed.end(), x) == allowed.end()) {
            std::string list;
            for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
            fail(k, "\"" + x + "\" is not one of " + list);
        }
        out[k] = x;
        return x;
    }

    std::vector<double> list(const std::string& k, std::optional<std::vector<double>> def = {}, bool increasing = false,
                             bool pos = true) {
        const json* v = get(k, def.has_value());
        std::vector<double> xs = def.value_or(std::vector<double>{});
        if (v) {
            if (!v->is_array() || v->empty()) fail(k, "must be a non-empty array of numbers");
            xs.clear();
            for (const auto& e : *v) xs.push_back(asNumber(k, e));
        }
        for (std::size_t i = 0; i < xs.size(); ++i) {
            if (pos && !(xs[i] > 0.0)) fail(k, "entries must be positive");
            if (increasing && i > 0 && !(xs[i] > xs[i - 1])) fail(k, "entries must be strictly increasing");
        }
        out[k] = xs;
        return xs;
    }

    const json& raw(const std::string& k) {
        const json* v = get(k, false);
        return *v;
    }

    void keep(const std::string& k, json v) { out[k] = std::move(v); }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!used_.count(it.key()))
                throw ConfigError("unknown key \"" + it.key() + "\"" + (where_.empty() ? "" : " in " + where_));
    }

    [[noreturn]] void fail(const std::string& k, const std::string& why) const {
        throw ConfigError("key \"" + (where_.empty() ? k : where_ + "." + k) + "\": " + why);
    }

    json out = json::object();

private:
    const json* get(const std::string& k, bool optional) {
        used_.insert(k);
        auto it = j_.find(k);
        if (it == j_.end()) {
            if (!optional) fail(k, "is required");
            return nullptr;
        }
        return &*it;
    }

    double asNumber(const std::string& k, const json& v) const {
        if (!v.is_number()) fail(k, "must be a number");
        return v.get<double>();
    }

    const json& j_;
    std::string where_;
    std::set<std::string> used_;
};

json resolveTail(const json& j, const std::string& where) {
    Reader r(j, where);
    const std::string fam = r.str("family", std::nullopt, {"power", "weibull", "log", "tabulated", "zero"});
    if (fam == "power") {
        r.positive("K", 1.0);
        r.positive("rho");
    } else if (fam == "weibull") {
        r.positive("G", 1.0);
        r.num("rhoG", 0.0);
        r.positive("A", 1.0);
        r.positive("alphaW");
    } else if (fam == "log") {
        r.positive("K", 1.0);
    } else if (fam == "tabulated") {
        r.list("x", std::nullopt, true, false);
        r.list("r", std::nullopt, false, false);
        r.str("extrapolation", "error", {"error", "power-law"});
    }
    r.finish();
    return r.out;
}

json resolveModel(const json& j) {
    Reader r(j, "model");
    const std::string type = r.str("type", std::nullopt, {"stable", "additive"});
    if (type == "stable") {
        r.num("alpha");
        r.num("beta", 0.0);
    } else {
        r.num("H");
    }
    r.positive("c", 1.0);
    r.num("gamma", 1.0);
    if (type == "additive") {
        r.keep("rPlus", resolveTail(r.raw("rPlus"), "model.rPlus"));
        r.keep("rMinus", r.has("rMinus") ? resolveTail(r.raw("rMinus"), "model.rMinus") : json{{"family", "zero"}});
    }
    r.finish();
    return r.out;
}

void simulationKeys(Reader& r) {
    r.positive("kappa", kCalibratedKappa);
    const double ratio = r.num("ratio", SimulationSpec{}.ratio);
    if (!(ratio > 1.0)) r.fail("ratio", "must exceed 1");
    if (r.uint("windowSteps", 64) < 1) r.fail("windowSteps", "must be at least 1");
    if (r.uint("gridLevel", 0) > 12) r.fail("gridLevel", "must be at most 12");
    r.positive("epsilonFactor", 1e-3);
    r.positive("maxExpectedJumps", 1e7);
}

void trials(Reader& r) {
    if (r.uint("n") < 1) r.fail("n", "must be at least 1");
    r.uint("seed");
}

} // namespace

const std::vector<std::string>& experimentKinds() {
    static const std::vector<std::string> k{"r-curve",  "laplace-check", "selfsim-check", "tail-classes",
                                            "overload", "piterbarg",     "regime",        "shifted-ratio"};
    return k;
}

json resolveConfig(const json& raw) {
    Reader r(raw, "");
    const std::string kind = r.str("kind", std::nullopt, experimentKinds());
    r.str("output", "out/" + kind, {});
    auto model = [&] {
        r.keep("model", resolveModel(r.raw("model")));
        // building the model runs its own validation; report failures as config errors
        try {
            (void)modelFromJson(r.out["model"]);
        } catch (const PreconditionError& e) {
            throw ConfigError(std::string("key \"model\": ") + e.what());
        }
    };

    if (kind == "r-curve") {
        model();
        r.list("uList");
        r.str("method", "numeric", {"numeric", "closed"});
    } else if (kind == "laplace-check") {
        model();
        r.list("uList");
    } else if (kind == "selfsim-check") {
        model();
        r.positive("a", 2.0);
        r.list("thetas", std::vector<double>{0.5, 1.0, 2.0});
        r.list("ts", std::vector<double>{0.5, 1.0, 2.0});
        r.num("perturbation", 0.05);
    } else if (kind == "tail-classes") {
        r.keep("tail", resolveTail(r.raw("tail"), "tail"));
        const double lo = r.positive("uMin", 1.0);
        if (!(r.positive("uMax", 1e8) > lo)) r.fail("uMax", "must exceed uMin");
        if (r.uint("points", 80) < 2) r.fail("points", "must be at least 2");
        r.positive("lambda", 2.0);
        r.positive("lambdaL", 1.0);
        r.positive("convolutionUMax", 1000.0);
        if (r.uint("meshN", 10000) < 16) r.fail("meshN", "must be at least 16");
        r.positive("deltaPD", 0.05);
        r.positive("deltaOR", 0.05);
        r.positive("deltaL", 0.02);
        r.positive("deltaS", 0.05);
    } else if (kind == "overload") {
        model();
        r.list("uList", std::nullopt, true);
        trials(r);
        if (r.num("t", 0.0) < 0.0) r.fail("t", "must be non-negative");
        r.str("event", "point", {"point", "sup", "inf"});
        r.boolean("stabilityCheck", false);
        simulationKeys(r);
    } else if (kind == "piterbarg") {
        model();
        r.list("uList", std::nullopt, true);
        trials(r);
        Reader w(r.raw("window"), "window");
        if (w.str("rule", std::nullopt, {"constant", "power"}) == "constant") {
            w.positive("t");
        } else {
            w.positive("c0");
            w.num("delta", 0.0);
        }
        w.finish();
        r.keep("window", w.out);
        simulationKeys(r);
    } else if (kind == "regime") {
        r.str("family", std::nullopt, {"weibull", "power", "stable"});
        r.positive("alphaW", 0.5);
        r.positive("rho", 2.0);
        r.list("H");
        r.list("gamma");
    } else if (kind == "shifted-ratio") {
        model();
        r.positive("t", 1.0);
        r.list("uList");
    }
    r.finish();
    return r.out;
}

TailFunction tailFromJson(const json& j) {
    const std::string fam = j.at("family").get<std::string>();
    if (fam == "power") return TailFunction::power(j.at("K").get<double>(), j.at("rho").get<double>());
    if (fam == "weibull")
        return TailFunction::weibull(j.at("G").get<double>(), j.at("rhoG").get<double>(), j.at("A").get<double>(),
                                     j.at("alphaW").get<double>());
    if (fam == "log") return TailFunction::logForm(j.at("K").get<double>());
    if (fam == "tabulated")
        return TailFunction::tabulated(j.at("x").get<std::vector<double>>(), j.at("r").get<std::vector<double>>(),
                                       j.at("extrapolation").get<std::string>() == "power-law" ? Extrapolation::PowerLaw
                                                                                                : Extrapolation::Error);
    if (fam == "zero") return TailFunction::zero();
    throw ConfigError("unknown tail family \"" + fam + "\"");
}

ProcessModel modelFromJson(const json& j) {
    if (j.at("type").get<std::string>() == "stable")
        return ProcessModel::stable(j.at("alpha").get<double>(), j.at("beta").get<double>(), j.at("c").get<double>(),
                                    j.at("gamma").get<double>());
    std::optional<TailFunction> minus;
    if (j.at("rMinus").at("family").get<std::string>() != "zero") minus = tailFromJson(j.at("rMinus"));
    return ProcessModel::additive(j.at("H").get<double>(), tailFromJson(j.at("rPlus")), minus, j.at("c").get<double>(),
                                  j.at("gamma").get<double>());
}

} // namespace ovl::cli
