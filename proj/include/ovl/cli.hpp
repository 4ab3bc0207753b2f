#pragma once

#include "ovl/model.hpp"

#include <nlohmann/json.hpp>

#include <string>
#include <string_view>
#include <vector>

namespace ovl::cli {

inline constexpr const char* kToolName = "ovl";
inline constexpr const char* kToolVersion = "0.1.0";

const std::vector<std::string>& experimentKinds();

// Schema check plus default filling. The result is the full resolved config
// echoed into manifests; running it again gives the same resolved config.
// Throws ConfigError naming the offending key.
nlohmann::json resolveConfig(const nlohmann::json& raw);

ProcessModel modelFromJson(const nlohmann::json& block);
TailFunction tailFromJson(const nlohmann::json& block);

struct Artifact {
    std::string name;  // file name inside the output directory
    std::string content;
};

// Runs a resolved config and returns its CSV artifacts; nothing touches disk.
std::vector<Artifact> runResolved(const nlohmann::json& resolved);

struct Outcome {
    int exitCode = 0;
    std::string message;
    std::vector<std::string> files;  // written paths, manifest last
};

// `input` is either a config or a manifest written by an earlier run.
// outDir overrides the configured output directory when non-empty.
Outcome runFile(const std::string& input, const std::string& outDir = {});
Outcome validateFile(const std::string& input);

// Weibull/power/stable sweep for the `regimes` command; grid is
// "H=<list>;gamma=<list>" with lists either "a,b,c" or "lo:hi:count".
std::string regimeCsv(const std::string& family, const std::string& grid, double alphaW, double rho);

std::string sha256Hex(std::string_view data);
std::string formatDouble(double v);
void writeAtomic(const std::string& path, const std::string& content);

int main(int argc, char** argv);

} // namespace ovl::cli
