#include "ubopf/network_io.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "ubopf/errors.hpp"

namespace ubopf {

using json = nlohmann::ordered_json;

namespace {

double require_number(const json& j, const std::string& key, const std::string& ctx) {
    if (!j.contains(key) || !j[key].is_number())
        throw ParseError(ctx + ": missing or non-numeric field '" + key + "'");
    return j[key].get<double>();
}

Matrix3c parse_matrix(const json& j, const std::string& key, const std::string& ctx) {
    if (!j.contains(key) || !j[key].is_array() || j[key].size() != 3)
        throw ParseError(ctx + ": field '" + key + "' must be a 3x3 matrix of [re, im] pairs");
    Matrix3c m;
    for (int r = 0; r < 3; ++r) {
        const auto& row = j[key][r];
        if (!row.is_array() || row.size() != 3)
            throw ParseError(ctx + ": field '" + key + "' row " + std::to_string(r) +
                             " must have 3 entries");
        for (int c = 0; c < 3; ++c) {
            const auto& cell = row[c];
            if (!cell.is_array() || cell.size() != 2 || !cell[0].is_number() ||
                !cell[1].is_number())
                throw ParseError(ctx + ": entry (" + std::to_string(r) + "," + std::to_string(c) +
                                 ") of '" + key + "' must be an [re, im] pair");
            m(r, c) = Complex(cell[0].get<double>(), cell[1].get<double>());
        }
    }
    return m;
}

json matrix_to_json(const Matrix3c& m) {
    json rows = json::array();
    for (int r = 0; r < 3; ++r) {
        json row = json::array();
        for (int c = 0; c < 3; ++c) row.push_back({m(r, c).real(), m(r, c).imag()});
        rows.push_back(row);
    }
    return rows;
}

}  // namespace

Network read_network(std::istream& in, const std::string& origin) {
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError(origin + ": " + e.what());
    }

    Network net;
    net.units = UnitSystem::si;

    if (!j.contains("bases")) throw ParseError(origin + ": missing 'bases' section");
    net.s_base = require_number(j["bases"], "s_base_va", origin + " bases");
    net.v_base_phase = require_number(j["bases"], "v_base_phase_v", origin + " bases");

    if (!j.contains("limits")) throw ParseError(origin + ": missing 'limits' section");
    net.limits.v_min = require_number(j["limits"], "v_min_pu", origin + " limits");
    net.limits.v_max = require_number(j["limits"], "v_max_pu", origin + " limits");

    if (!j.contains("nodes") || !j["nodes"].is_array())
        throw ParseError(origin + ": missing 'nodes' array");
    for (const auto& jn : j["nodes"]) {
        Node n;
        n.id = static_cast<int>(require_number(jn, "id", origin + " node"));
        n.is_slack = jn.value("is_slack", false);
        n.nominal_phase_voltage = net.v_base_phase;
        net.nodes.push_back(n);
    }

    for (const auto& jl : j.value("lines", json::array())) {
        const std::string ctx = origin + " line";
        Line l;
        l.from_node = static_cast<int>(require_number(jl, "from", ctx));
        l.to_node = static_cast<int>(require_number(jl, "to", ctx));
        l.z_series = parse_matrix(jl, "z_series", ctx);
        l.y_shunt = parse_matrix(jl, "y_shunt", ctx);
        if (jl.contains("p_flow_max_w")) l.p_flow_max = jl["p_flow_max_w"].get<double>();
        net.lines.push_back(l);
    }

    for (const auto& jd : j.value("loads", json::array())) {
        const std::string ctx = origin + " load";
        Load d;
        d.node = static_cast<int>(require_number(jd, "node", ctx));
        if (!jd.contains("phase") || !jd["phase"].is_string())
            throw ParseError(ctx + ": missing 'phase'");
        d.phase = parse_phase(jd["phase"].get<std::string>());
        d.p_demand = require_number(jd, "p_w", ctx);
        d.q_demand = require_number(jd, "q_var", ctx);
        net.loads.push_back(d);
    }

    for (const auto& jg : j.value("conv_generators", json::array())) {
        const std::string ctx = origin + " conv_generator";
        ConventionalGenerator g;
        g.node = static_cast<int>(require_number(jg, "node", ctx));
        g.p_min = require_number(jg, "p_min_w", ctx);
        g.p_max = require_number(jg, "p_max_w", ctx);
        g.q_min = require_number(jg, "q_min_var", ctx);
        g.q_max = require_number(jg, "q_max_var", ctx);
        g.cost = require_number(jg, "cost_per_w", ctx);
        net.conventional_generators.push_back(g);
    }

    for (const auto& jg : j.value("pv_inverters", json::array())) {
        const std::string ctx = origin + " pv_inverter";
        PvInverter g;
        g.node = static_cast<int>(require_number(jg, "node", ctx));
        if (!jg.contains("phase") || !jg["phase"].is_string())
            throw ParseError(ctx + ": missing 'phase'");
        g.phase = parse_phase(jg["phase"].get<std::string>());
        g.s_available = require_number(jg, "s_available_va", ctx);
        net.pv_inverters.push_back(g);
    }

    require_valid(net);
    return net;
}

Network load_network(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open network file '" + path + "'");
    return read_network(in, path);
}

std::string network_to_json(const Network& network) {
    const Network net = from_per_unit(network);
    json j;
    j["bases"] = {{"s_base_va", net.s_base}, {"v_base_phase_v", net.v_base_phase}};
    j["limits"] = {{"v_min_pu", net.limits.v_min}, {"v_max_pu", net.limits.v_max}};
    j["nodes"] = json::array();
    for (const auto& n : net.nodes)
        j["nodes"].push_back({{"id", n.id}, {"is_slack", n.is_slack}});
    j["lines"] = json::array();
    for (const auto& l : net.lines) {
        json jl = {{"from", l.from_node},
                   {"to", l.to_node},
                   {"z_series", matrix_to_json(l.z_series)},
                   {"y_shunt", matrix_to_json(l.y_shunt)}};
        if (l.p_flow_max) jl["p_flow_max_w"] = *l.p_flow_max;
        j["lines"].push_back(jl);
    }
    j["loads"] = json::array();
    for (const auto& d : net.loads)
        j["loads"].push_back({{"node", d.node},
                              {"phase", phase_name(d.phase)},
                              {"p_w", d.p_demand},
                              {"q_var", d.q_demand}});
    j["conv_generators"] = json::array();
    for (const auto& g : net.conventional_generators)
        j["conv_generators"].push_back({{"node", g.node},
                                        {"p_min_w", g.p_min},
                                        {"p_max_w", g.p_max},
                                        {"q_min_var", g.q_min},
                                        {"q_max_var", g.q_max},
                                        {"cost_per_w", g.cost}});
    j["pv_inverters"] = json::array();
    for (const auto& g : net.pv_inverters)
        j["pv_inverters"].push_back({{"node", g.node},
                                     {"phase", phase_name(g.phase)},
                                     {"s_available_va", g.s_available}});
    return j.dump(2);
}

void save_network(const Network& network, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot open '" + path + "' for writing");
    out << network_to_json(network) << "\n";
}

std::string network_hash(const Network& network) {
    const std::string s = network_to_json(network);
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << h;
    return os.str();
}

}  // namespace ubopf
