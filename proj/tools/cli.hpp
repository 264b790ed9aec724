#ifndef SDP_TOOLS_CLI_HPP
#define SDP_TOOLS_CLI_HPP

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "sdp/serialize.hpp"

namespace sdp::cli {

enum ExitCode { kOk = 0, kFailure = 1, kConfigError = 2, kIoError = 3 };

// Effective configuration after merging the config file with the flags.
struct RunConfig {
    std::optional<double> D, alpha, mu;
    std::string command;
    std::optional<double> tol;
    std::optional<double> epsilon;
    std::optional<std::string> out;
    std::optional<std::string> format;
    std::string mode = "x";
    std::optional<std::string> eq;
    std::optional<std::string> branch;
    std::optional<double> D_min, D_max;
};

inline const std::vector<std::string>& commands()
{
    static const std::vector<std::string> names{"equilibria", "portrait", "shoot", "classify", "scan", "check"};
    return names;
}

/// Reads {"params": {...}, "command": "...", "options": {...}}. Unknown keys throw Error.
RunConfig config_from_json(const Json& j);
Json to_json(const RunConfig& cfg);

// One line of the check ledger.
struct CheckLine {
    std::string name;
    bool pass;
    std::string detail;
};

std::vector<CheckLine> check_suite(const ModelParams& p, const IntegrateOptions& opts);

/// args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace sdp::cli

#endif // SDP_TOOLS_CLI_HPP
