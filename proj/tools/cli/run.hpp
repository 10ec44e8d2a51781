#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace ringwave::cli {

enum ExitCode : int {
    kOk = 0,
    kInternal = 1,
    kConfigError = 2,
    kSolverError = 3,
    kValidationFailed = 4,
};

/// One parsed command line. Flags that are set override the matching config fields.
struct Invocation {
    std::string command;
    std::string config_path;              // empty: all defaults
    std::optional<std::string> out;
    int jobs = 1;
    std::optional<std::uint64_t> seed;
    std::optional<int> k;
    std::optional<std::string> family;
    std::vector<double> nu;
    std::optional<int> steps;
    std::optional<int> grid;
    std::optional<long long> iters;
    std::optional<double> energy;
    std::optional<std::string> loop;
};

inline const std::vector<std::string>& commands() {
    static const std::vector<std::string> c{"dispersion", "resonances", "fixdim", "branch",
                                            "validate",   "cradle",     "homog"};
    return c;
}

/// Runs one subcommand; returns an ExitCode. Progress goes to `out`, diagnostics to `err`.
int run(const Invocation& inv, std::ostream& out, std::ostream& err);

/// Parses argv with the full flag set and dispatches to run().
int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ringwave::cli
