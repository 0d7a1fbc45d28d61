#include "ubopf/network.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <set>
#include <sstream>

#include "ubopf/errors.hpp"

namespace ubopf {

namespace {

bool finite(const Matrix3c& m) {
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c)
            if (!std::isfinite(m(r, c).real()) || !std::isfinite(m(r, c).imag())) return false;
    return true;
}

bool symmetric(const Matrix3c& m, double tol) {
    double scale = m.cwiseAbs().maxCoeff();
    if (scale == 0.0) return true;
    return (m - m.transpose()).cwiseAbs().maxCoeff() <= tol * scale;
}

// Relative reciprocal condition number of a 3x3 complex matrix.
double rcond(const Matrix3c& m) {
    Eigen::JacobiSVD<Matrix3c> svd(m);
    double smax = svd.singularValues()(0);
    double smin = svd.singularValues()(2);
    if (smax == 0.0) return 0.0;
    return smin / smax;
}

std::string line_label(const Line& l) {
    std::ostringstream os;
    os << "line " << l.from_node << "->" << l.to_node;
    return os.str();
}

}  // namespace

std::vector<Diagnostic> validate_network(const Network& net) {
    std::vector<Diagnostic> diags;
    auto add = [&](const std::string& el, const std::string& msg) {
        diags.push_back({el, msg});
    };

    if (net.s_base <= 0.0) add("bases", "s_base must be positive");
    if (net.v_base_phase <= 0.0) add("bases", "v_base_phase must be positive");
    if (!(net.limits.v_min > 0.0)) add("limits", "v_min must be positive");
    if (!(net.limits.v_min < net.limits.v_max)) add("limits", "v_min must be below v_max");

    std::set<int> ids;
    int slack_count = 0;
    for (const auto& n : net.nodes) {
        if (!ids.insert(n.id).second)
            add("node " + std::to_string(n.id), "duplicate node id");
        if (n.is_slack) ++slack_count;
        if (!(n.nominal_phase_voltage > 0.0))
            add("node " + std::to_string(n.id), "nominal_phase_voltage must be positive");
    }
    if (net.nodes.empty()) add("nodes", "network has no nodes");
    if (slack_count == 0) add("nodes", "no slack node");
    if (slack_count > 1) add("nodes", "multiple slack nodes");

    auto known = [&](int id) { return ids.count(id) > 0; };

    for (const auto& l : net.lines) {
        const std::string el = line_label(l);
        if (l.from_node == l.to_node) add(el, "line endpoints must differ");
        if (!known(l.from_node)) add(el, "unknown node " + std::to_string(l.from_node));
        if (!known(l.to_node)) add(el, "unknown node " + std::to_string(l.to_node));
        if (!finite(l.z_series) || !finite(l.y_shunt)) {
            add(el, "non-finite matrix entry");
            continue;
        }
        if (!symmetric(l.z_series, 1e-9)) add(el, "z_series not symmetric");
        if (rcond(l.z_series) < 1e-12) add(el, "singular series impedance");
        if (!symmetric(l.y_shunt, 1e-9)) add(el, "y_shunt not symmetric");
        for (int p = 0; p < 3; ++p)
            if (l.y_shunt(p, p).real() < -1e-15)
                add(el, "y_shunt diagonal has negative real part");
    }

    for (const auto& d : net.loads) {
        const std::string el = "load at node " + std::to_string(d.node);
        if (!known(d.node)) add(el, "unknown node");
        if (d.p_demand < 0.0) add(el, "p_demand must be non-negative");
        if (!std::isfinite(d.p_demand) || !std::isfinite(d.q_demand))
            add(el, "non-finite demand");
    }

    for (const auto& g : net.conventional_generators) {
        const std::string el = "generator at node " + std::to_string(g.node);
        if (!known(g.node)) add(el, "unknown node");
        if (g.p_min > g.p_max) add(el, "p_min exceeds p_max");
        if (g.q_min > g.q_max) add(el, "q_min exceeds q_max");
        if (g.cost < 0.0) add(el, "cost must be non-negative");
    }

    for (const auto& g : net.pv_inverters) {
        const std::string el = "pv inverter at node " + std::to_string(g.node);
        if (!known(g.node)) add(el, "unknown node");
        if (g.s_available < 0.0) add(el, "s_available must be non-negative");
    }

    // Connectivity over lines (ignoring orientation).
    if (!net.nodes.empty() && ids.size() == net.nodes.size()) {
        std::set<int> seen{net.nodes.front().id};
        bool grew = true;
        while (grew) {
            grew = false;
            for (const auto& l : net.lines) {
                bool f = seen.count(l.from_node), t = seen.count(l.to_node);
                if (f != t) {
                    seen.insert(f ? l.to_node : l.from_node);
                    grew = true;
                }
            }
        }
        if (seen.size() != ids.size()) add("nodes", "network graph is not connected");
    }

    return diags;
}

void require_valid(const Network& net) {
    auto diags = validate_network(net);
    if (diags.empty()) return;
    std::ostringstream os;
    os << "invalid network (" << diags.size() << " problem(s)):";
    for (const auto& d : diags) os << "\n  " << d.element << ": " << d.message;
    throw ValidationError(os.str());
}

namespace {

// scale < 1 direction means "to per-unit": divide quantities by bases.
Network convert(const Network& net, bool to_pu) {
    if (net.s_base <= 0.0 || net.v_base_phase <= 0.0)
        throw std::domain_error("per-unit conversion requires positive bases");

    const double z_base = net.v_base_phase * net.v_base_phase / net.s_base;
    const double s_div = to_pu ? net.s_base : 1.0 / net.s_base;
    const double z_div = to_pu ? z_base : 1.0 / z_base;

    Network out = net;
    out.units = to_pu ? UnitSystem::per_unit : UnitSystem::si;
    for (auto& l : out.lines) {
        l.z_series /= z_div;
        l.y_shunt *= z_div;
        if (l.p_flow_max) l.p_flow_max = *l.p_flow_max / s_div;
    }
    for (auto& d : out.loads) {
        d.p_demand /= s_div;
        d.q_demand /= s_div;
    }
    for (auto& g : out.conventional_generators) {
        g.p_min /= s_div;
        g.p_max /= s_div;
        g.q_min /= s_div;
        g.q_max /= s_div;
        g.cost *= s_div;  // currency/W -> currency/pu and back
    }
    for (auto& g : out.pv_inverters) g.s_available /= s_div;
    return out;
}

}  // namespace

Network to_per_unit(const Network& net) {
    if (net.units == UnitSystem::per_unit) return net;
    return convert(net, true);
}

Network from_per_unit(const Network& net) {
    if (net.units == UnitSystem::si) return net;
    return convert(net, false);
}

}  // namespace ubopf
