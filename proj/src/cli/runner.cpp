#include "ovl/cli.hpp"
#include "ovl/errors.hpp"
#include "ovl/simd.hpp"

#include <CLI11.hpp>
#include <openssl/sha.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

namespace ovl::cli {

using nlohmann::json;
namespace fs = std::filesystem;

std::string sha256Hex(std::string_view data) {
    unsigned char md[SHA256_DIGEST_LENGTH];
    SHA256(reinterpret_cast<const unsigned char*>(data.data()), data.size(), md);
    static const char* hex = "0123456789abcdef";
    std::string s;
    for (unsigned char b : md) {
        s += hex[b >> 4];
        s += hex[b & 15];
    }
    return s;
}

void writeAtomic(const std::string& path, const std::string& content) {
    const fs::path p(path);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    const fs::path tmp = p.string() + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        f << content;
        f.flush();
        if (!f) throw std::runtime_error("cannot write " + tmp.string());
    }
    fs::rename(tmp, p);
}

namespace {

json readJson(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot open " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    try {
        return json::parse(ss.str());
    } catch (const json::parse_error& e) {
        throw ConfigError(path + ": invalid JSON: " + e.what());
    }
}

bool isManifest(const json& j) {
    return j.is_object() && j.contains("tool") && j.contains("config") && j["tool"] == kToolName;
}

unsigned threadCount() {
    if (const char* env = std::getenv("OVL_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v > 0) return unsigned(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

template <class F>
Outcome guarded(F&& f) {
    Outcome o;
    try {
        f(o);
    } catch (const Error& e) {
        o.exitCode = exitCode(e.kind());
        o.message = e.what();
    } catch (const json::exception& e) {
        o.exitCode = 2;
        o.message = std::string("config: ") + e.what();
    } catch (const std::exception& e) {
        o.exitCode = 1;
        o.message = e.what();
    }
    return o;
}

} // namespace

Outcome validateFile(const std::string& input) {
    return guarded([&](Outcome& o) {
        json j = readJson(input);
        const json resolved = resolveConfig(isManifest(j) ? j["config"] : j);
        o.message = resolved.dump(2);
    });
}

Outcome runFile(const std::string& input, const std::string& outDir) {
    return guarded([&](Outcome& o) {
        json j = readJson(input);
        if (isManifest(j)) {
            // replay on the kernels the artifacts were produced with unless overridden
            if (j.contains("kernels") && !std::getenv("OVL_SIMD"))
                setenv("OVL_SIMD", j["kernels"].get<std::string>().c_str(), 0);
            j = j["config"];
        }
        const json resolved = resolveConfig(j);
        const auto t0 = std::chrono::steady_clock::now();
        const std::vector<Artifact> arts = runResolved(resolved);
        const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

        const fs::path dir = outDir.empty() ? fs::path(resolved["output"].get<std::string>()) : fs::path(outDir);
        const std::string canonical = resolved.dump();
        json manifest{{"tool", kToolName},
                      {"version", kToolVersion},
                      {"kind", resolved["kind"]},
                      {"config", resolved},
                      {"configHash", sha256Hex(canonical)},
                      {"kernels", simd::isaName(simd::active().isa)},
                      {"threads", threadCount()},
                      {"wallTimeSeconds", wall}};
        if (resolved.contains("seed")) manifest["seed"] = resolved["seed"];
        json outputs = json::array();
        for (const auto& a : arts) {
            const std::string path = (dir / a.name).string();
            writeAtomic(path, a.content);
            outputs.push_back({{"file", a.name}, {"sha256", sha256Hex(a.content)}, {"bytes", a.content.size()}});
            o.files.push_back(path);
        }
        manifest["outputs"] = outputs;
        const std::string mpath = (dir / "manifest.json").string();
        writeAtomic(mpath, manifest.dump(2) + "\n");
        o.files.push_back(mpath);
        o.message = "wrote " + std::to_string(o.files.size()) + " files to " + dir.string();
    });
}

int main(int argc, char** argv) {
    CLI::App app{"Storage-process overload toolkit: quadrature oracles, path simulation and Monte Carlo checks"};
    app.require_subcommand(1);
    std::string kinds = "Experiment kinds (config \"kind\"):\n";
    for (const auto& k : experimentKinds()) kinds += "  " + k + "\n";
    kinds += "Exit codes: 0 ok, 2 config error, 3 numerical failure, 4 budget exceeded.\n"
             "Environment: OVL_THREADS worker count, OVL_SIMD=scalar|avx2|neon.";
    app.footer(kinds);

    std::string config, out;
    auto* run = app.add_subcommand("run", "run an experiment config (or replay a manifest)");
    run->add_option("config", config, "config or manifest JSON")->required();
    run->add_option("--out", out, "output directory overriding the config");

    std::string vconfig;
    auto* validate = app.add_subcommand("validate", "check a config and print it fully resolved");
    validate->add_option("config", vconfig, "config JSON")->required();

    std::string family, grid, rout;
    double alphaW = 0.5, rho = 2.0;
    auto* regimes = app.add_subcommand("regimes", "print a regime table as CSV");
    regimes->add_option("--family", family, "weibull, power or stable")->required();
    regimes->add_option("--grid", grid, "H=<values>;gamma=<values>, values a,b,c or lo:hi:count")->required();
    regimes->add_option("--alphaW", alphaW, "Weibull exponent");
    regimes->add_option("--rho", rho, "power tail index");
    regimes->add_option("--out", rout, "CSV path (stdout when absent)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    Outcome o;
    if (*run) {
        o = runFile(config, out);
    } else if (*validate) {
        o = validateFile(vconfig);
    } else {
        o = guarded([&](Outcome& r) {
            if (family != "weibull" && family != "power" && family != "stable")
                throw ConfigError("--family: \"" + family + "\" is not one of weibull, power, stable");
            const std::string csv = regimeCsv(family, grid, alphaW, rho);
            if (rout.empty()) {
                std::cout << csv;
            } else {
                writeAtomic(rout, csv);
                r.message = "wrote " + rout;
            }
        });
    }
    if (o.exitCode == 0) {
        if (!o.message.empty()) std::cout << o.message << "\n";
    } else {
        std::cerr << "error: " << o.message << "\n";
    }
    return o.exitCode;
}

} // namespace ovl::cli
