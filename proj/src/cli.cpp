#include "ubopf/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "ubopf/errors.hpp"
#include "ubopf/network_io.hpp"

namespace ubopf {

namespace {

void write_document(const RunConfig& config, const std::string& doc) {
    if (config.output_path) {
        std::ofstream out(*config.output_path);
        if (!out) throw ParseError("cannot open output file '" + *config.output_path + "'");
        out << doc;
    } else {
        std::cout << doc;
    }
}

int run_validate(const RunConfig& config) {
    std::ifstream in(config.network_path);
    if (!in) {
        std::cerr << "error: cannot open '" << config.network_path << "'\n";
        return 1;
    }
    try {
        const Network net = read_network(in, config.network_path);
        std::cout << "ok: " << net.node_count() << " nodes, " << net.lines.size() << " lines, "
                  << net.loads.size() << " loads, " << net.conventional_generators.size()
                  << " conventional generators, " << net.pv_inverters.size()
                  << " pv inverters\n";
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "invalid: " << e.what() << "\n";
        return 1;
    }
}

int run_pf(const RunConfig& config) {
    const Network net = ensure_per_unit(load_network(config.network_path));
    PfOptions pfo;
    pfo.tolerance = config.pf_tolerance;
    const PfSolution pf = solve_power_flow(net, fixed_injections(net, config.full_pv), pfo);
    std::cout << "power flow converged in " << pf.iterations << " iteration(s), mismatch "
              << pf.max_mismatch << " pu, max |V| " << pf.voltages.cwiseAbs().maxCoeff()
              << " pu\n";
    write_document(config, emit_voltage_profile(net, pf, config.format));
    return 0;
}

SolveOptions solve_options(const RunConfig& config) {
    SolveOptions so;
    so.tolerance = config.opf_tolerance;
    so.multistart = config.multistart;
    so.seed = config.seed;
    so.verbose = config.verbose;
    return so;
}

int run_opf(const RunConfig& config) {
    const Network net = ensure_per_unit(load_network(config.network_path));
    const OptimizationProblem prob = build_problem(net, config.strategy);
    OpfRunResult result;
    result.solution = solve(prob, solve_options(config));
    if (result.solution.status != OpfStatus::optimal_local) {
        std::cerr << "solver failed: status " << opf_status_name(result.solution.status)
                  << ", max constraint violation " << result.solution.max_constraint_violation
                  << " pu\n";
        return 2;
    }
    result.verification = verify_solution(net, result.solution);
    if (!result.verification.passed) {
        std::cerr << "verification failed:";
        for (const auto& f : result.verification.failures) std::cerr << "\n  " << f;
        std::cerr << "\n";
        return 2;
    }
    result.curtailment = compute_curtailment(net, result.solution);
    std::cout << "opf optimal: injected " << result.curtailment.p_injected_kw << " kW of "
              << result.curtailment.p_available_kw << " kW available, curtailed "
              << result.curtailment.p_curtailed_kw << " kW, v_max "
              << result.curtailment.v_max_pu << " pu\n";
    write_document(config, emit_report(result, config.format));
    return 0;
}

int run_study(const RunConfig& config) {
    const Network net = load_network(config.network_path);
    const auto specs = load_scenarios(config.scenario_path);
    StudyOptions opts;
    opts.solve = solve_options(config);
    opts.pf.tolerance = config.pf_tolerance;
    const StudyResult study = run_study(net, specs, opts);
    int infeasible = 0;
    for (const auto& row : study.rows)
        if (!row.feasible) ++infeasible;
    std::cout << "study complete: " << study.rows.size() << " rows, " << infeasible
              << " infeasible\n";
    write_document(config, emit_report(study, config.format));
    return infeasible == 0 ? 0 : 2;
}

}  // namespace

int run(const RunConfig& config) {
    try {
        switch (config.command) {
            case RunConfig::Command::validate: return run_validate(config);
            case RunConfig::Command::pf: return run_pf(config);
            case RunConfig::Command::opf: return run_opf(config);
            case RunConfig::Command::study: return run_study(config);
        }
    } catch (const NumericalError& e) {
        std::cerr << "solver error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}

int cli_main(int argc, const char* const* argv) {
    CLI::App app{"Unbalanced three-phase power flow and optimal PV dispatch"};
    app.require_subcommand(1);

    RunConfig config;
    if (const char* env = std::getenv("UBOPF_TOL")) {
        const double tol = std::atof(env);
        if (tol > 0.0) {
            config.pf_tolerance = tol;
            config.opf_tolerance = tol;
        }
    }

    std::string strategy = "pq", format = "table";

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--network", config.network_path, "network file (JSON)")->required();
        cmd->add_option("--output,-o", config.output_path, "write the full document here");
        cmd->add_option("--format", format, "table, csv or json");
    };

    auto* validate = app.add_subcommand("validate", "check a network file");
    validate->add_option("--network", config.network_path, "network file (JSON)")->required();

    auto* pf = app.add_subcommand("pf", "fixed-injection power flow");
    add_common(pf);
    pf->add_flag("--full-pv", config.full_pv, "inject the full available PV power");
    pf->add_option("--pf-tol", config.pf_tolerance, "power mismatch tolerance, pu");

    auto* opf = app.add_subcommand("opf", "optimal PV dispatch");
    add_common(opf);
    opf->add_option("--strategy", strategy, "none, p or pq");
    opf->add_option("--multistart", config.multistart, "number of perturbed starts");
    opf->add_option("--seed", config.seed, "seed for start perturbations");
    opf->add_option("--opf-tol", config.opf_tolerance, "KKT tolerance");
    opf->add_flag("--verbose", config.verbose, "print solver iterations");

    auto* study = app.add_subcommand("study", "scenario comparison study");
    add_common(study);
    study->add_option("--scenarios", config.scenario_path, "scenario file (JSON)")->required();
    study->add_option("--multistart", config.multistart, "number of perturbed starts");
    study->add_option("--seed", config.seed, "seed for start perturbations");
    study->add_option("--opf-tol", config.opf_tolerance, "KKT tolerance");
    study->add_option("--pf-tol", config.pf_tolerance, "power mismatch tolerance, pu");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        std::cout << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n" << app.help();
        return 64;
    }

    try {
        if (validate->parsed()) config.command = RunConfig::Command::validate;
        if (pf->parsed()) config.command = RunConfig::Command::pf;
        if (opf->parsed()) {
            config.command = RunConfig::Command::opf;
            config.strategy = parse_strategy(strategy);
        }
        if (study->parsed()) config.command = RunConfig::Command::study;
        config.format = parse_format(format);
    } catch (const ParseError& e) {
        std::cerr << e.what() << "\n";
        return 64;
    }

    return run(config);
}

}  // namespace ubopf
