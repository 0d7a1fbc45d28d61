#pragma once

#include <string>

#include "ubopf/opf.hpp"
#include "ubopf/powerflow.hpp"
#include "ubopf/scenarios.hpp"

namespace ubopf {

enum class OutputFormat { table, csv, json };

OutputFormat parse_format(const std::string& s);

/// One OPF run bundled with its curtailment figures and verification.
struct OpfRunResult {
    OpfSolution solution;
    CurtailmentReport curtailment;
    VerificationReport verification;
};

/// Serializes a study; kW and pu columns carry 4 decimals in table/csv,
/// JSON carries raw doubles. Throws ValidationError when a feasible row
/// was not verified.
std::string emit_report(const StudyResult& study, OutputFormat format);

/// Serializes a single OPF result. Throws ValidationError when the
/// solution was not verified.
std::string emit_report(const OpfRunResult& result, OutputFormat format);

/// Per-node-per-phase voltage magnitudes of a power-flow solution,
/// suitable for plotting a feeder profile.
std::string emit_voltage_profile(const Network& network, const PfSolution& pf,
                                 OutputFormat format);

}  // namespace ubopf
