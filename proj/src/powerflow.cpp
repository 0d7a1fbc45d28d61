#include "ubopf/powerflow.hpp"

#include <Eigen/Dense>
#include <sstream>

#include "ubopf/errors.hpp"

namespace ubopf {

ComplexVector fixed_injections(const Network& network_pu, bool pv_at_full) {
    const Network& net = network_pu;
    ComplexVector s = ComplexVector::Zero(3 * net.node_count());
    for (const auto& d : net.loads)
        s(net.row(net.node_index(d.node), d.phase)) -= Complex(d.p_demand, d.q_demand);
    if (pv_at_full) {
        // Unity power factor: the full available apparent power as P.
        for (const auto& g : net.pv_inverters)
            s(net.row(net.node_index(g.node), g.phase)) += Complex(g.s_available, 0.0);
    }
    return s;
}

ComplexVector nodal_power_injections(const ComplexVector& v, const ComplexVector& i) {
    return v.array() * i.array().conjugate();
}

namespace {

// Rows of the stacked vector belonging to the slack node.
bool is_slack_row(int row, int slack_idx) { return row / 3 == slack_idx; }

}  // namespace

PfSolution solve_power_flow(const Network& network, const ComplexVector& injections_pu,
                            const PfOptions& options) {
    const Network net = ensure_per_unit(network);
    const int n = net.node_count();
    const int dim = 3 * n;
    const int slack = net.slack_index();
    if (slack < 0) throw ValidationError("power flow requires a slack node");
    if (injections_pu.size() != dim)
        throw ValidationError("injection vector size does not match network");

    const GlobalAdmittance y = assemble_global_admittance(net);
    const Eigen::SparseMatrix<Complex> ys = y.to_sparse();

    // Unknown layout: for each non-slack row r, unknowns (e_r, f_r).
    std::vector<int> rows;  // stacked row -> position among unknowns
    rows.reserve(dim);
    std::vector<int> unknown_of_row(dim, -1);
    for (int r = 0; r < dim; ++r) {
        if (is_slack_row(r, slack)) continue;
        unknown_of_row[r] = static_cast<int>(rows.size());
        rows.push_back(r);
    }
    const int m = static_cast<int>(rows.size());

    ComplexVector v(dim);
    if (options.initial_voltages) {
        if (options.initial_voltages->size() != dim)
            throw ValidationError("initial voltage vector size does not match network");
        v = *options.initial_voltages;
    } else {
        for (int i = 0; i < n; ++i)
            for (Phase p : all_phases) v(3 * i + phase_index(p)) = balanced_phasor(p);
    }
    for (Phase p : all_phases) v(3 * slack + phase_index(p)) = balanced_phasor(p);

    auto mismatch = [&](const ComplexVector& volt) {
        ComplexVector inj = ys * volt;
        ComplexVector mis(m);
        for (int k = 0; k < m; ++k) {
            const int r = rows[k];
            mis(k) = injections_pu(r) - volt(r) * std::conj(inj(r));
        }
        return mis;
    };

    auto inf_norm = [](const ComplexVector& x) {
        double worst = 0.0;
        for (int k = 0; k < x.size(); ++k)
            worst = std::max({worst, std::abs(x(k).real()), std::abs(x(k).imag())});
        return worst;
    };

    ComplexVector mis = mismatch(v);
    double norm = inf_norm(mis);
    int iter = 0;

    Eigen::MatrixXd jac(2 * m, 2 * m);
    Eigen::VectorXd rhs(2 * m), step(2 * m);

    while (norm > options.tolerance && iter < options.max_iterations) {
        ++iter;

        // d S_r / d e_c = delta_rc * conj(I_r) + V_r * conj(Y_rc)
        // d S_r / d f_c = i * (delta_rc * conj(I_r) - V_r * conj(Y_rc))
        const ComplexVector cur = ys * v;
        jac.setZero();
        for (int col = 0; col < ys.outerSize(); ++col) {
            for (Eigen::SparseMatrix<Complex>::InnerIterator it(ys, col); it; ++it) {
                const int r = static_cast<int>(it.row());
                const int c = col;
                const int kr = unknown_of_row[r];
                const int kc = unknown_of_row[c];
                if (kr < 0 || kc < 0) continue;
                const Complex vy = v(r) * std::conj(it.value());
                const Complex de = (r == c ? std::conj(cur(r)) : Complex(0, 0)) + vy;
                const Complex df = Complex(0, 1) * ((r == c ? std::conj(cur(r)) : Complex(0, 0)) - vy);
                jac(kr, kc) = de.real();
                jac(kr, m + kc) = df.real();
                jac(m + kr, kc) = de.imag();
                jac(m + kr, m + kc) = df.imag();
            }
        }
        // Diagonal conj(I_r) terms for rows whose Y diagonal block is zero
        // do not occur on connected networks; Y(r,r) always exists.

        for (int k = 0; k < m; ++k) {
            rhs(k) = mis(k).real();
            rhs(m + k) = mis(k).imag();
        }

        Eigen::PartialPivLU<Eigen::MatrixXd> lu(jac);
        step = lu.solve(rhs);
        if (!step.allFinite()) {
            std::ostringstream os;
            os << "singular power-flow Jacobian at iteration " << iter;
            throw NumericalError(os.str());
        }

        // Mismatch convention: mis = S_spec - S(V), so J*dx = mis gives the
        // Newton step directly (J here is +dS/dx).
        double alpha = 1.0;
        ComplexVector v_next = v;
        ComplexVector mis_next;
        double norm_next = norm;
        for (int halvings = 0; halvings < 25; ++halvings) {
            v_next = v;
            for (int k = 0; k < m; ++k)
                v_next(rows[k]) += alpha * Complex(step(k), step(m + k));
            mis_next = mismatch(v_next);
            norm_next = inf_norm(mis_next);
            if (norm_next < norm || norm_next <= options.tolerance) break;
            alpha *= 0.5;
        }
        if (norm_next >= norm && norm > options.tolerance) {
            std::ostringstream os;
            os << "power flow stalled at iteration " << iter << ", mismatch " << norm;
            throw NumericalError(os.str());
        }
        v = v_next;
        mis = mis_next;
        norm = norm_next;
    }

    if (norm > options.tolerance) {
        std::ostringstream os;
        os << "power flow did not converge in " << options.max_iterations
           << " iterations, final mismatch " << norm;
        throw NumericalError(os.str());
    }

    PfSolution sol;
    sol.voltages = v;
    sol.currents = ys * v;
    sol.powers = nodal_power_injections(v, sol.currents);
    sol.max_mismatch = norm;
    sol.iterations = iter;
    sol.converged = true;
    return sol;
}

double estimate_voltage_rise(double p, double q, const TheveninEquivalent& th) {
    if (th.u_th <= 0.0) throw std::domain_error("Thevenin voltage must be positive");
    return (p * th.r_th + q * th.x_th) / th.u_th;
}

TheveninEquivalent extract_thevenin(const Network& network, int node_id, Phase phase) {
    const Network net = ensure_per_unit(network);
    const int n = net.node_count();
    const int slack = net.slack_index();
    const int target = net.node_index(node_id);
    if (slack < 0) throw ValidationError("network has no slack node");
    if (target < 0) throw ValidationError("unknown node " + std::to_string(node_id));

    if (static_cast<int>(net.lines.size()) != n - 1)
        throw ValidationError("Thevenin extraction supports radial networks only");

    // BFS tree from the slack; a revisited node means a mesh.
    std::vector<int> parent_line(n, -1);
    std::vector<int> parent_node(n, -1);
    std::vector<bool> seen(n, false);
    seen[slack] = true;
    std::vector<int> queue{slack};
    for (std::size_t qi = 0; qi < queue.size(); ++qi) {
        const int u = queue[qi];
        for (std::size_t li = 0; li < net.lines.size(); ++li) {
            const auto& l = net.lines[li];
            const int a = net.node_index(l.from_node);
            const int b = net.node_index(l.to_node);
            int other = -1;
            if (a == u) other = b;
            else if (b == u) other = a;
            else continue;
            if (other == parent_node[u] && parent_line[u] == static_cast<int>(li)) continue;
            if (seen[other])
                throw ValidationError("Thevenin extraction supports radial networks only");
            seen[other] = true;
            parent_node[other] = u;
            parent_line[other] = static_cast<int>(li);
            queue.push_back(other);
        }
    }

    Complex z_acc(0.0, 0.0);
    const int ph = phase_index(phase);
    for (int u = target; u != slack; u = parent_node[u]) {
        if (parent_line[u] < 0)
            throw ValidationError("no path from slack to node " + std::to_string(node_id));
        z_acc += net.lines[parent_line[u]].z_series(ph, ph);
    }

    TheveninEquivalent th;
    th.r_th = z_acc.real();
    th.x_th = z_acc.imag();
    th.u_th = 1.0;  // balanced 1 pu slack source
    return th;
}

}  // namespace ubopf
