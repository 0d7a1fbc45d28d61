#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "ubopf/phase.hpp"

namespace ubopf {

using Matrix3c = Eigen::Matrix3cd;
using Vector3c = Eigen::Vector3cd;

struct Node {
    int id = 0;
    double nominal_phase_voltage = 0.0;  // volts
    bool is_slack = false;
};

/// Three-phase line section between two nodes, pi-model data.
/// z_series is the 3x3 series impedance matrix, y_shunt the total 3x3
/// shunt admittance (half is lumped at each end).
struct Line {
    int from_node = 0;
    int to_node = 0;
    Matrix3c z_series;  // ohm (or pu)
    Matrix3c y_shunt;   // siemens (or pu)
    std::optional<double> p_flow_max = std::nullopt;  // W per phase (or pu); absent = unlimited
};

/// Single-phase constant-PQ demand. q_demand > 0 absorbs (inductive),
/// q_demand < 0 injects (capacitive).
struct Load {
    int node = 0;
    Phase phase = Phase::a;
    double p_demand = 0.0;  // W (or pu)
    double q_demand = 0.0;  // var (or pu)
};

/// Dispatchable generator with independent per-phase injections, each
/// bounded by the same box, priced linearly on active power.
struct ConventionalGenerator {
    int node = 0;
    double p_min = 0.0, p_max = 0.0;  // W (or pu), per phase
    double q_min = 0.0, q_max = 0.0;  // var (or pu), per phase
    double cost = 0.0;                // currency per W (or per pu)
};

/// Single-phase PV inverter. s_available is the irradiance-dependent
/// apparent-power limit at the instant under study, not the nameplate.
struct PvInverter {
    int node = 0;
    Phase phase = Phase::a;
    double s_available = 0.0;  // VA (or pu)
};

struct OperatingLimits {
    double v_min = 0.97;  // pu
    double v_max = 1.03;  // pu
};

enum class UnitSystem { si, per_unit };

/// Immutable description of a three-phase feeder. Every node carries all
/// three phases electrically; single-phase devices attach to one phase.
struct Network {
    std::vector<Node> nodes;
    std::vector<Line> lines;
    std::vector<Load> loads;
    std::vector<ConventionalGenerator> conventional_generators;
    std::vector<PvInverter> pv_inverters;
    OperatingLimits limits;
    double s_base = 1000.0;          // VA, per phase
    double v_base_phase = 230.9401;  // V, phase-to-neutral
    UnitSystem units = UnitSystem::si;

    int node_count() const { return static_cast<int>(nodes.size()); }

    /// Position of a node id in the nodes vector, -1 if absent.
    int node_index(int node_id) const {
        for (std::size_t k = 0; k < nodes.size(); ++k)
            if (nodes[k].id == node_id) return static_cast<int>(k);
        return -1;
    }

    int slack_index() const {
        for (std::size_t k = 0; k < nodes.size(); ++k)
            if (nodes[k].is_slack) return static_cast<int>(k);
        return -1;
    }

    /// Row of (node_index, phase) in any stacked 3n vector, node-major.
    int row(int node_idx, Phase p) const { return 3 * node_idx + phase_index(p); }

    double total_load_p() const {
        double s = 0.0;
        for (const auto& l : loads) s += l.p_demand;
        return s;
    }
    double total_pv_capacity() const {
        double s = 0.0;
        for (const auto& g : pv_inverters) s += g.s_available;
        return s;
    }
};

struct Diagnostic {
    std::string element;  // e.g. "line 3->4", "node 7"
    std::string message;
};

/// Checks every structural invariant. Returns an empty list iff the
/// network is valid; never throws.
std::vector<Diagnostic> validate_network(const Network& network);

/// Throws ValidationError listing all diagnostics if any invariant fails.
void require_valid(const Network& network);

/// Scales impedances, admittances, powers and voltages to per-unit on
/// (s_base, v_base_phase). Idempotent on already-converted networks.
Network to_per_unit(const Network& network);

/// Inverse of to_per_unit; recovers SI quantities.
Network from_per_unit(const Network& network);

/// `network` converted to pu if it is not already.
inline Network ensure_per_unit(const Network& network) {
    return network.units == UnitSystem::per_unit ? network : to_per_unit(network);
}

}  // namespace ubopf
