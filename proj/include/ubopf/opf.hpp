#pragma once

#include <array>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ubopf/network.hpp"
#include "ubopf/nlp.hpp"
#include "ubopf/powerflow.hpp"

namespace ubopf {

/// Inverter control strategy embedded in the optimization problem.
///  - NoControl: unity power factor, full available power (fixed).
///  - ActiveOnly: unity power factor, curtailable active power.
///  - ActiveReactive: any point of the apparent-power semicircle.
enum class Strategy { NoControl, ActiveOnly, ActiveReactive };

const char* strategy_name(Strategy s);
Strategy parse_strategy(const std::string& s);

/// Constraint-family and variable bookkeeping of a built problem, used by
/// reports and tests.
struct ProblemStructure {
    int num_variables = 0;       // 2*3n voltages + 2 per generator phase + 2 per inverter
    int num_balance_eq = 0;      // 2 per (node, phase)
    int num_slack_fix_eq = 0;    // 6: slack phasors held at 1 pu balanced
    int num_qpv_zero_eq = 0;     // ActiveOnly / NoControl
    int num_ppv_fix_eq = 0;      // NoControl
    int num_voltage_ineq = 0;    // two per non-slack (node, phase)
    int num_gen_box_ineq = 0;    // four per generator phase
    int num_disc_ineq = 0;       // ActiveReactive: one per inverter
    int num_ppv_upper_ineq = 0;  // ActiveOnly: P <= S per inverter
    int num_ppv_nonneg_ineq = 0;
    int num_flow_ineq = 0;       // two per (limited line, phase)
};

/// The UBOPF as a quadratic NLP over rectangular voltages and generator
/// injections, plus the index maps needed to read a solution back.
struct OptimizationProblem {
    Network network;  // per-unit (caller's base)
    Strategy strategy = Strategy::ActiveReactive;
    std::shared_ptr<QuadraticNlp> nlp;
    ProblemStructure structure;
    double objective_scale = 1.0;  // internal objective = cost / objective_scale + tie-break
    // The NLP works on a rebased power unit (admittance entries around 10)
    // so that generator columns and voltage columns of the balance rows
    // carry comparable weight; extraction converts back.
    Network network_internal;
    double power_rescale = 1.0;  // user pu = power_rescale * internal pu
    // Gradient-based row scaling applied on top (value 1 for rows that
    // were already well scaled).
    std::vector<double> eq_scales, ineq_scales;

    // Variable indices.
    int e_index(int row) const { return row; }
    int f_index(int row) const { return 3 * network.node_count() + row; }
    int pconv_index(int gen, int phase) const;
    int qconv_index(int gen, int phase) const;
    int ppv_index(int unit) const;
    int qpv_index(int unit) const;

    Eigen::VectorXd initial_point(double pv_fraction = 0.9) const;
};

enum class OpfStatus { optimal_local, infeasible, iteration_limit };

const char* opf_status_name(OpfStatus s);

struct OpfSolution {
    Strategy strategy = Strategy::ActiveReactive;
    OpfStatus status = OpfStatus::iteration_limit;
    ComplexVector voltages;  // pu, stacked node-major phase-minor

    struct ConvInjection {
        int node = 0;
        std::array<double, 3> p{}, q{};  // pu per phase
    };
    std::vector<ConvInjection> conventional;

    struct PvInjection {
        int node = 0;
        Phase phase = Phase::a;
        double p = 0.0, q = 0.0;  // pu
        double s_available = 0.0;  // pu
    };
    std::vector<PvInjection> pv;

    double objective = 0.0;  // total conventional cost, currency units
    double kkt_stationarity = 0.0;
    double max_constraint_violation = 0.0;  // pu
    int iterations = 0;
    int starts_used = 1;

    double max_voltage_pu() const;
    double total_pv_p() const;  // pu
};

struct SolveOptions {
    double tolerance = 1e-8;        // IPM KKT tolerance
    double feasibility_tol = 1e-6;  // acceptance gate, pu
    int max_iterations = 500;
    int multistart = 5;
    unsigned seed = 1;
    double start_perturbation = 0.05;  // +-5% on the PV active-power start
    bool verbose = false;
};

/// Formulates the optimization problem for a validated network. Throws
/// FormulationError when the network has no conventional generator.
OptimizationProblem build_problem(const Network& network, Strategy strategy);

/// Local solve with multistart; returns the best feasible local optimum.
OpfSolution solve(const OptimizationProblem& problem, const SolveOptions& options = {});

/// Every constraint family recomputed from scratch through the admittance
/// module, plus a power-flow re-simulation with the solution's injections.
struct VerificationReport {
    std::map<std::string, double> family_violation;  // max |violation| per family, pu
    double pf_voltage_gap = 0.0;                     // inf-norm vs independent PF, pu
    bool passed = false;
    std::vector<std::string> failures;

    double max_violation() const;
};

VerificationReport verify_solution(const Network& network, const OpfSolution& solution,
                                   double tolerance = 1e-6);

struct InverterBreakdown {
    int node = 0;
    Phase phase = Phase::a;
    double p_w = 0.0, q_var = 0.0, s_available_va = 0.0;
    std::optional<double> delta_p_w;  // vs. a comparison solution
};

struct CurtailmentReport {
    double p_available_kw = 0.0;
    double p_injected_kw = 0.0;
    double p_curtailed_kw = 0.0;
    double curtailed_percent = 0.0;
    double v_max_pu = 0.0;
    std::vector<InverterBreakdown> per_inverter;
    double tie_break_epsilon = 1e-6;  // disclosed objective regularizer
};

CurtailmentReport compute_curtailment(const Network& network, const OpfSolution& solution,
                                      const OpfSolution* comparison = nullptr);

/// No-control report: every inverter injects its full available power.
CurtailmentReport compute_curtailment_no_control(const Network& network,
                                                 const PfSolution& pf_solution);

}  // namespace ubopf
