#pragma once

// Command-line front end. run_cli is the whole program minus process
// plumbing, so tests drive it in-process.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace cohere {

enum ExitCode : int {
    kExitOk = 0,
    kExitUsage = 2,  // bad flags, unreadable or malformed input
    kExitAnalysis = 3,
    kExitIncoherent = 4,
    kExitIntegration = 5,
};

struct RunConfig {
    std::string command;
    std::string input;
    std::string format;  // ode | graph; empty means "by extension"
    std::uint64_t seed = 42;
    std::vector<double> x0;
    std::optional<double> t_end;  // per-command default when unset
    std::optional<double> dt;
    double rtol = 1e-8;
    std::map<std::string, double> tolerances;  // overrides by name
    std::string output;  // json | csv; empty means the command default
    std::string out;  // empty means the stream passed to run_cli
};

/// Names accepted by --tol.<name>, with their defaults.
const std::map<std::string, double>& default_tolerances();

/// args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cohere
