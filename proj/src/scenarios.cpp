#include "ubopf/scenarios.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "ubopf/errors.hpp"
#include "ubopf/network_io.hpp"

namespace ubopf {

std::array<double, 3> phase_demand_shares(const Network& network) {
    std::array<double, 3> p{};
    double total = 0.0;
    for (const auto& d : network.loads) {
        p[phase_index(d.phase)] += d.p_demand;
        total += d.p_demand;
    }
    if (total > 0.0)
        for (auto& v : p) v *= 100.0 / total;
    return p;
}

namespace {

double share_deviation(const std::array<double, 3>& shares, const std::array<double, 3>& target) {
    double d = 0.0;
    for (int i = 0; i < 3; ++i) d += std::abs(shares[i] - target[i]);
    return d;
}

// Moves whole loads between phases, greedily reducing the total deviation
// from the target shares. Deterministic: loads scanned in file order,
// phases in (a, b, c) order, first strict improvement per sweep wins.
void reallocate_phases(Network& net, const std::array<double, 3>& target) {
    const int n_loads = static_cast<int>(net.loads.size());
    double total = 0.0;
    for (const auto& d : net.loads) total += d.p_demand;
    if (total <= 0.0) throw ValidationError("phase reallocation needs positive total demand");

    auto shares = phase_demand_shares(net);
    double dev = share_deviation(shares, target);
    for (int sweep = 0; sweep < 10 * n_loads; ++sweep) {
        int best_load = -1;
        Phase best_phase = Phase::a;
        double best_dev = dev - 1e-12;
        for (int li = 0; li < n_loads; ++li) {
            const Phase orig = net.loads[li].phase;
            const double w = 100.0 * net.loads[li].p_demand / total;
            for (Phase p : all_phases) {
                if (p == orig) continue;
                auto s = shares;
                s[phase_index(orig)] -= w;
                s[phase_index(p)] += w;
                const double d = share_deviation(s, target);
                if (d < best_dev) {
                    best_dev = d;
                    best_load = li;
                    best_phase = p;
                }
            }
        }
        if (best_load < 0) break;
        const Phase orig = net.loads[best_load].phase;
        const double w = 100.0 * net.loads[best_load].p_demand / total;
        shares[phase_index(orig)] -= w;
        shares[phase_index(best_phase)] += w;
        net.loads[best_load].phase = best_phase;
        dev = best_dev;
    }

    for (int i = 0; i < 3; ++i) {
        if (std::abs(shares[i] - target[i]) > 1.0) {
            std::ostringstream os;
            os << "phase shares unreachable with the given loads; best achievable "
               << shares[0] << "/" << shares[1] << "/" << shares[2] << " vs target " << target[0]
               << "/" << target[1] << "/" << target[2];
            throw ValidationError(os.str());
        }
    }
}

}  // namespace

Network apply_scenario(const Network& base, const ScenarioSpec& spec) {
    if (!(spec.pv_scale > 0.0)) throw ValidationError("pv_scale must be positive");
    if (!(spec.demand_scale > 0.0)) throw ValidationError("demand_scale must be positive");
    if (spec.capacitive_fraction < 0.0 || spec.capacitive_fraction > 1.0)
        throw ValidationError("capacitive_fraction must lie in [0, 1]");
    if (spec.phase_shares) {
        const auto& t = *spec.phase_shares;
        if (std::abs(t[0] + t[1] + t[2] - 100.0) > 0.1)
            throw ValidationError("phase_shares must sum to 100 +- 0.1");
    }

    Network net = base;
    for (auto& g : net.pv_inverters) g.s_available *= spec.pv_scale;
    for (auto& d : net.loads) {
        d.p_demand *= spec.demand_scale;
        d.q_demand *= spec.demand_scale;
    }
    if (spec.capacitive_fraction > 0.0) {
        const int flip =
            static_cast<int>(std::ceil(spec.capacitive_fraction * net.loads.size() - 1e-12));
        for (int i = 0; i < flip && i < static_cast<int>(net.loads.size()); ++i)
            net.loads[i].q_demand = -std::abs(net.loads[i].q_demand);
    }
    if (spec.phase_shares) reallocate_phases(net, *spec.phase_shares);
    return net;
}

std::vector<ScenarioSpec> load_scenarios(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open scenario file '" + path + "'");
    nlohmann::ordered_json j;
    try {
        j = nlohmann::ordered_json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(path + ": " + e.what());
    }
    if (!j.contains("scenarios") || !j["scenarios"].is_array())
        throw ParseError(path + ": missing 'scenarios' array");
    std::vector<ScenarioSpec> specs;
    for (const auto& js : j["scenarios"]) {
        ScenarioSpec s;
        if (!js.contains("name") || !js["name"].is_string())
            throw ParseError(path + ": scenario entry without a name");
        s.name = js["name"].get<std::string>();
        s.pv_scale = js.value("pv_scale", 1.0);
        s.demand_scale = js.value("demand_scale", 1.0);
        s.capacitive_fraction = js.value("capacitive_fraction", 0.0);
        if (js.contains("phase_shares")) {
            const auto& t = js["phase_shares"];
            if (!t.is_array() || t.size() != 3)
                throw ParseError(path + ": phase_shares must be a 3-element array");
            s.phase_shares = std::array<double, 3>{t[0].get<double>(), t[1].get<double>(),
                                                   t[2].get<double>()};
        }
        specs.push_back(std::move(s));
    }
    return specs;
}

StudyResult run_study(const Network& base, const std::vector<ScenarioSpec>& specs,
                      const StudyOptions& options) {
    StudyResult result;
    result.base_network_hash = network_hash(base);
    result.specs = specs;

    for (const auto& spec : specs) {
        const Network net = ensure_per_unit(apply_scenario(base, spec));

        double v_max_nc = 0.0;
        StudyRow nc_row;
        nc_row.scenario = spec.name;
        nc_row.strategy = Strategy::NoControl;
        try {
            const PfSolution pf = solve_power_flow(net, fixed_injections(net, true), options.pf);
            nc_row.report = compute_curtailment_no_control(net, pf);
            v_max_nc = nc_row.report.v_max_pu;
            nc_row.v_max_no_control = v_max_nc;
            nc_row.verified = true;
        } catch (const NumericalError& e) {
            nc_row.feasible = false;
            nc_row.note = e.what();
        }
        result.rows.push_back(nc_row);

        const OpfSolution* p_only_solution = nullptr;
        OpfSolution p_only_store;
        for (Strategy st : {Strategy::ActiveOnly, Strategy::ActiveReactive}) {
            StudyRow row;
            row.scenario = spec.name;
            row.strategy = st;
            row.v_max_no_control = v_max_nc;
            try {
                const OptimizationProblem prob = build_problem(net, st);
                OpfSolution sol = solve(prob, options.solve);
                if (sol.status != OpfStatus::optimal_local) {
                    row.feasible = false;
                    std::ostringstream os;
                    os << "status " << opf_status_name(sol.status) << ", max violation "
                       << sol.max_constraint_violation;
                    row.note = os.str();
                } else {
                    const VerificationReport ver =
                        verify_solution(net, sol, options.solve.feasibility_tol);
                    row.verified = ver.passed;
                    if (!ver.passed) {
                        row.feasible = false;
                        row.note = ver.failures.empty() ? "verification failed"
                                                        : ver.failures.front();
                    } else {
                        row.report = compute_curtailment(net, sol, p_only_solution);
                        if (st == Strategy::ActiveOnly) {
                            p_only_store = sol;
                            p_only_solution = &p_only_store;
                        }
                    }
                }
            } catch (const std::exception& e) {
                row.feasible = false;
                row.note = e.what();
            }
            result.rows.push_back(row);
        }
    }
    return result;
}

}  // namespace ubopf
