#include "ubopf/report.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "ubopf/errors.hpp"

namespace ubopf {

using json = nlohmann::ordered_json;

OutputFormat parse_format(const std::string& s) {
    if (s == "table") return OutputFormat::table;
    if (s == "csv") return OutputFormat::csv;
    if (s == "json") return OutputFormat::json;
    throw ParseError("unknown output format '" + s + "' (expected table, csv or json)");
}

namespace {

std::string fix4(double v) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(4) << v;
    return os.str();
}

void require_rows_verified(const StudyResult& study) {
    for (const auto& row : study.rows)
        if (row.feasible && !row.verified)
            throw ValidationError("refusing to emit study with unverified row (scenario '" +
                                  row.scenario + "', strategy " + strategy_name(row.strategy) +
                                  ")");
}

json row_to_json(const StudyRow& row) {
    json j;
    j["scenario"] = row.scenario;
    j["strategy"] = strategy_name(row.strategy);
    j["status"] = row.feasible ? "ok" : "infeasible";
    if (row.feasible) {
        j["p_available_kw"] = row.report.p_available_kw;
        j["p_injected_kw"] = row.report.p_injected_kw;
        j["curtailment_kw"] = row.report.p_curtailed_kw;
        j["curtailment_pct"] = row.report.curtailed_percent;
        j["v_max_pu"] = row.report.v_max_pu;
        j["v_max_no_control_pu"] = row.v_max_no_control;
    } else {
        j["note"] = row.note;
    }
    return j;
}

}  // namespace

std::string emit_report(const StudyResult& study, OutputFormat format) {
    require_rows_verified(study);

    if (format == OutputFormat::json) {
        json j;
        j["study"]["base_network_hash"] = study.base_network_hash;
        j["study"]["tie_break_epsilon"] = 1e-6;
        j["study"]["rows"] = json::array();
        for (const auto& row : study.rows) j["study"]["rows"].push_back(row_to_json(row));
        return j.dump(2) + "\n";
    }

    if (format == OutputFormat::csv) {
        std::ostringstream os;
        os << "scenario,strategy,status,p_available_kw,p_injected_kw,curtailment_kw,"
              "curtailment_pct,v_max_pu,v_max_no_control_pu\n";
        for (const auto& row : study.rows) {
            os << row.scenario << ',' << strategy_name(row.strategy) << ','
               << (row.feasible ? "ok" : "infeasible") << ',';
            if (row.feasible) {
                os << fix4(row.report.p_available_kw) << ',' << fix4(row.report.p_injected_kw)
                   << ',' << fix4(row.report.p_curtailed_kw) << ','
                   << fix4(row.report.curtailed_percent) << ',' << fix4(row.report.v_max_pu)
                   << ',' << fix4(row.v_max_no_control);
            } else {
                os << ",,,,,";
            }
            os << '\n';
        }
        return os.str();
    }

    std::ostringstream os;
    os << std::left << std::setw(12) << "scenario" << std::setw(12) << "strategy" << std::right
       << std::setw(12) << "avail_kW" << std::setw(12) << "inj_kW" << std::setw(12) << "curt_kW"
       << std::setw(10) << "curt_%" << std::setw(10) << "vmax_pu" << '\n';
    for (const auto& row : study.rows) {
        os << std::left << std::setw(12) << row.scenario << std::setw(12)
           << strategy_name(row.strategy) << std::right;
        if (row.feasible) {
            os << std::setw(12) << fix4(row.report.p_available_kw) << std::setw(12)
               << fix4(row.report.p_injected_kw) << std::setw(12)
               << fix4(row.report.p_curtailed_kw) << std::setw(10)
               << fix4(row.report.curtailed_percent) << std::setw(10)
               << fix4(row.report.v_max_pu);
        } else {
            os << "  infeasible: " << row.note;
        }
        os << '\n';
    }
    return os.str();
}

std::string emit_report(const OpfRunResult& result, OutputFormat format) {
    if (result.solution.status == OpfStatus::optimal_local && !result.verification.passed)
        throw ValidationError("refusing to emit unverified OPF solution");

    const auto& sol = result.solution;
    const auto& cur = result.curtailment;

    if (format == OutputFormat::json) {
        json j;
        j["opf"]["strategy"] = strategy_name(sol.strategy);
        j["opf"]["status"] = opf_status_name(sol.status);
        j["opf"]["objective"] = sol.objective;
        j["opf"]["kkt_stationarity"] = sol.kkt_stationarity;
        j["opf"]["max_constraint_violation"] = sol.max_constraint_violation;
        j["opf"]["iterations"] = sol.iterations;
        j["opf"]["starts_used"] = sol.starts_used;
        j["opf"]["v_max_pu"] = cur.v_max_pu;
        j["opf"]["curtailment"] = {{"p_available_kw", cur.p_available_kw},
                                   {"p_injected_kw", cur.p_injected_kw},
                                   {"p_curtailed_kw", cur.p_curtailed_kw},
                                   {"curtailed_percent", cur.curtailed_percent},
                                   {"tie_break_epsilon", cur.tie_break_epsilon}};
        j["opf"]["pf_cross_check_gap_pu"] = result.verification.pf_voltage_gap;
        j["opf"]["inverters"] = json::array();
        for (const auto& b : cur.per_inverter) {
            json ji = {{"node", b.node},
                       {"phase", phase_name(b.phase)},
                       {"p_w", b.p_w},
                       {"q_var", b.q_var},
                       {"s_available_va", b.s_available_va}};
            if (b.delta_p_w) ji["delta_p_w"] = *b.delta_p_w;
            j["opf"]["inverters"].push_back(ji);
        }
        return j.dump(2) + "\n";
    }

    if (format == OutputFormat::csv) {
        std::ostringstream os;
        os << "node,phase,p_w,q_var,s_available_va\n";
        for (const auto& b : cur.per_inverter)
            os << b.node << ',' << phase_name(b.phase) << ',' << fix4(b.p_w) << ','
               << fix4(b.q_var) << ',' << fix4(b.s_available_va) << '\n';
        return os.str();
    }

    std::ostringstream os;
    os << "strategy:          " << strategy_name(sol.strategy) << '\n'
       << "status:            " << opf_status_name(sol.status) << '\n'
       << "objective:         " << sol.objective << '\n'
       << "v_max:             " << fix4(cur.v_max_pu) << " pu\n"
       << "available:         " << fix4(cur.p_available_kw) << " kW\n"
       << "injected:          " << fix4(cur.p_injected_kw) << " kW\n"
       << "curtailed:         " << fix4(cur.p_curtailed_kw) << " kW (" << fix4(cur.curtailed_percent)
       << " %)\n"
       << "kkt stationarity:  " << sol.kkt_stationarity << '\n'
       << "max violation:     " << sol.max_constraint_violation << " pu\n"
       << "pf cross-check:    " << result.verification.pf_voltage_gap << " pu\n"
       << '\n'
       << std::left << std::setw(6) << "node" << std::setw(7) << "phase" << std::right
       << std::setw(12) << "P_W" << std::setw(12) << "Q_var" << std::setw(14) << "S_avail_VA"
       << '\n';
    for (const auto& b : cur.per_inverter)
        os << std::left << std::setw(6) << b.node << std::setw(7) << phase_name(b.phase)
           << std::right << std::setw(12) << fix4(b.p_w) << std::setw(12) << fix4(b.q_var)
           << std::setw(14) << fix4(b.s_available_va) << '\n';
    return os.str();
}

std::string emit_voltage_profile(const Network& network, const PfSolution& pf,
                                 OutputFormat format) {
    const Network net = ensure_per_unit(network);
    constexpr double kRadToDeg = 57.29577951308232;

    if (format == OutputFormat::json) {
        json j;
        j["voltages"] = json::array();
        for (int i = 0; i < net.node_count(); ++i)
            for (Phase p : all_phases) {
                const Complex v = pf.voltages(net.row(i, p));
                j["voltages"].push_back({{"node", net.nodes[i].id},
                                         {"phase", phase_name(p)},
                                         {"v_pu", std::abs(v)},
                                         {"angle_deg", std::arg(v) * kRadToDeg}});
            }
        j["max_mismatch_pu"] = pf.max_mismatch;
        j["iterations"] = pf.iterations;
        return j.dump(2) + "\n";
    }

    std::ostringstream os;
    const char sep = format == OutputFormat::csv ? ',' : ' ';
    if (format == OutputFormat::csv)
        os << "node,phase,v_pu,angle_deg\n";
    else
        os << std::left << std::setw(6) << "node" << std::setw(7) << "phase" << std::right
           << std::setw(10) << "v_pu" << std::setw(12) << "angle_deg" << '\n';
    for (int i = 0; i < net.node_count(); ++i)
        for (Phase p : all_phases) {
            const Complex v = pf.voltages(net.row(i, p));
            if (format == OutputFormat::csv) {
                os << net.nodes[i].id << sep << phase_name(p) << sep << fix4(std::abs(v)) << sep
                   << fix4(std::arg(v) * kRadToDeg) << '\n';
            } else {
                os << std::left << std::setw(6) << net.nodes[i].id << std::setw(7)
                   << phase_name(p) << std::right << std::setw(10) << fix4(std::abs(v))
                   << std::setw(12) << fix4(std::arg(v) * kRadToDeg) << '\n';
            }
        }
    return os.str();
}

}  // namespace ubopf
