#pragma once

#include <optional>
#include <string>

#include "ubopf/report.hpp"

namespace ubopf {

/// Parsed command line of the `ubopf` tool.
struct RunConfig {
    enum class Command { validate, pf, opf, study };
    Command command = Command::validate;
    std::string network_path;
    std::string scenario_path;                      // study only
    Strategy strategy = Strategy::ActiveReactive;   // opf only
    bool full_pv = false;                           // pf only
    std::optional<std::string> output_path;
    OutputFormat format = OutputFormat::table;
    double pf_tolerance = 1e-8;
    double opf_tolerance = 1e-8;
    int multistart = 5;
    unsigned seed = 1;
    bool verbose = false;
};

/// Executes a parsed configuration. Returns the process exit status:
/// 0 success, 1 validation/formulation error, 2 solver failure.
int run(const RunConfig& config);

/// Full command-line entry point (parse + run). Returns the exit status;
/// usage errors yield 64.
int cli_main(int argc, const char* const* argv);

}  // namespace ubopf
