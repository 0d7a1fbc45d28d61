#pragma once

#include <optional>

#include "ubopf/admittance.hpp"
#include "ubopf/network.hpp"

namespace ubopf {

/// Converged per-node-per-phase state of a power-flow solve, all pu.
/// Vectors are stacked node-major, phase-minor (GlobalAdmittance layout).
struct PfSolution {
    ComplexVector voltages;  // V_i^phi
    ComplexVector currents;  // I_i^phi = (Y V)_i^phi
    ComplexVector powers;    // S_i^phi = V_i^phi * conj(I_i^phi)
    double max_mismatch = 0.0;
    int iterations = 0;
    bool converged = false;

    Complex voltage(const Network& net, int node_id, Phase p) const {
        return voltages(net.row(net.node_index(node_id), p));
    }
};

struct PfOptions {
    double tolerance = 1e-8;  // inf-norm power mismatch, pu
    int max_iterations = 50;
    /// Optional warm start, stacked 3n complex voltages.
    std::optional<ComplexVector> initial_voltages;
};

/// Net complex power injections (generation minus demand) per
/// (node, phase), pu, for a fixed-injection power-flow solve. Slack-node
/// entries are ignored by the solver.
ComplexVector fixed_injections(const Network& network_pu, bool pv_at_full);

/// I = Y * V (nodal current injections).
inline ComplexVector nodal_current_injections(const GlobalAdmittance& y, const ComplexVector& v) {
    return y.multiply(v);
}

/// S_i^phi = V_i^phi * conj(I_i^phi) for stacked vectors.
ComplexVector nodal_power_injections(const ComplexVector& v, const ComplexVector& i);

/// Newton-Raphson in rectangular coordinates with fixed injections at all
/// non-slack (node, phase) entries and balanced 1 pu phasors at the slack
/// node. Throws NumericalError on non-convergence or a singular Jacobian.
PfSolution solve_power_flow(const Network& network, const ComplexVector& injections_pu,
                            const PfOptions& options = {});

/// Thevenin view of the upstream grid seen from one (node, phase).
struct TheveninEquivalent {
    double r_th = 0.0;  // pu
    double x_th = 0.0;  // pu
    double u_th = 1.0;  // pu
};

/// Linearized voltage rise (P*R_th + Q*X_th) / U_th.
double estimate_voltage_rise(double p, double q, const TheveninEquivalent& th);

/// Accumulated series impedance from the slack node to `node_id` on a
/// radial network (diagonal phase entry). Throws ValidationError for
/// meshed networks; the estimator is diagnostic-only.
TheveninEquivalent extract_thevenin(const Network& network, int node_id, Phase phase);

}  // namespace ubopf
