#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "ubopf/network.hpp"
#include "ubopf/opf.hpp"

namespace ubopf {

/// Parameterized transformation of a base network.
struct ScenarioSpec {
    std::string name;
    double pv_scale = 1.0;
    double demand_scale = 1.0;
    /// Fraction of loads (first ceil(f*N) in file order) whose reactive
    /// demand is flipped to injection (capacitive).
    double capacitive_fraction = 0.0;
    /// Optional per-phase targets for the share of total active demand,
    /// percent (a, b, c). Loads are moved whole between phases.
    std::optional<std::array<double, 3>> phase_shares;
};

/// Applies a scenario to a base network deterministically. Throws
/// ValidationError on invalid spec fields or unreachable phase shares
/// (the message reports the best achievable shares).
Network apply_scenario(const Network& base, const ScenarioSpec& spec);

/// Current per-phase shares of total active demand, percent.
std::array<double, 3> phase_demand_shares(const Network& network);

std::vector<ScenarioSpec> load_scenarios(const std::string& path);

struct StudyRow {
    std::string scenario;
    Strategy strategy = Strategy::NoControl;
    bool feasible = true;
    bool verified = false;
    CurtailmentReport report;
    double v_max_no_control = 0.0;  // pu, same for all rows of the scenario
    std::string note;               // failure detail for infeasible rows
};

struct StudyResult {
    std::vector<StudyRow> rows;
    std::string base_network_hash;
    std::vector<ScenarioSpec> specs;
};

struct StudyOptions {
    SolveOptions solve;
    PfOptions pf;
};

/// For each scenario: no-control power flow, then ActiveOnly and
/// ActiveReactive solves, each verified before inclusion. Infeasible
/// scenarios are marked and the study continues.
StudyResult run_study(const Network& base, const std::vector<ScenarioSpec>& specs,
                      const StudyOptions& options = {});

}  // namespace ubopf
