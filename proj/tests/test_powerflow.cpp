#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "test_helpers.hpp"
#include "ubopf/errors.hpp"
#include "ubopf/powerflow.hpp"

using namespace ubopf;
using ubopf::testing::gauss_power_flow;
using ubopf::testing::make_random_injections;
using ubopf::testing::make_random_network;
using ubopf::testing::make_two_node;

namespace {

// Scalar fixed point V <- 1 + z * conj(S / V), the single-phase-equivalent
// oracle for a decoupled two-node line.
Complex scalar_gauss(Complex z, Complex s, double tol = 1e-13) {
    Complex v(1.0, 0.0);
    for (int i = 0; i < 10000; ++i) {
        const Complex next = 1.0 + z * std::conj(s / v);
        if (std::abs(next - v) < tol) return next;
        v = next;
    }
    return v;
}

}  // namespace

TEST_CASE("zero injections converge to slack phasors immediately") {
    std::mt19937 rng(2);
    const Network net = make_random_network(rng, 3);
    const ComplexVector s = ComplexVector::Zero(9);
    const PfSolution sol = solve_power_flow(net, s);
    CHECK(sol.converged);
    CHECK(sol.iterations <= 1);
    for (int i = 0; i < 3; ++i)
        for (Phase p : all_phases)
            CHECK(std::abs(sol.voltage(net, i + 1, p) - balanced_phasor(p)) < 1e-12);
}

TEST_CASE("two-node case matches the scalar Gauss oracle") {
    const Complex z(0.05, 0.02);
    const Network net = make_two_node(z);
    ComplexVector s = ComplexVector::Zero(6);
    // balanced injection of 0.5 pu per phase; decoupled phases behave as
    // three copies of the scalar circuit
    for (Phase p : all_phases) s(net.row(1, p)) = Complex(0.5, 0.0);
    const PfSolution sol = solve_power_flow(net, s);
    const Complex v_oracle_a = scalar_gauss(z, Complex(0.5, 0.0));
    CHECK(std::abs(sol.voltage(net, 2, Phase::a) - v_oracle_a) <= 1e-10);
    // rotated copies on the other phases
    for (Phase p : {Phase::b, Phase::c})
        CHECK(std::abs(sol.voltage(net, 2, p) - v_oracle_a * balanced_phasor(p)) <= 1e-10);
}

TEST_CASE("slack voltages equal their phasors exactly") {
    std::mt19937 rng(4);
    const Network net = make_random_network(rng, 4);
    const ComplexVector s = make_random_injections(rng, net);
    const PfSolution sol = solve_power_flow(net, s);
    const int slack = net.slack_index();
    for (Phase p : all_phases)
        CHECK(sol.voltages(net.row(slack, p)) == balanced_phasor(p));
}

TEST_CASE("Newton matches the Gauss fixed-point oracle on random networks") {
    std::mt19937 rng(42);
    for (int k = 0; k < 12; ++k) {
        const Network net = make_random_network(rng, 2 + k % 3);
        const ComplexVector s = make_random_injections(rng, net);
        const PfSolution newton = solve_power_flow(net, s);
        const ComplexVector gauss = gauss_power_flow(net, s);
        CHECK((newton.voltages - gauss).cwiseAbs().maxCoeff() <= 1e-9);
    }
}

TEST_CASE("converged solution satisfies the injection equations") {
    std::mt19937 rng(10);
    const Network net = make_random_network(rng, 4);
    const ComplexVector s = make_random_injections(rng, net);
    const PfSolution sol = solve_power_flow(net, s);
    const int slack = net.slack_index();
    for (int r = 0; r < 12; ++r) {
        if (r / 3 == slack) continue;
        CHECK(std::abs(s(r) - sol.powers(r)) <= 1e-8);
    }
}

TEST_CASE("power conservation: generation - load - losses = 0") {
    std::mt19937 rng(20);
    const Network net = make_random_network(rng, 4);
    const ComplexVector s = make_random_injections(rng, net);
    const PfSolution sol = solve_power_flow(net, s);

    // Total injected power (slack included) must equal total line losses,
    // computed per line per phase as S_ij + S_ji through branch currents.
    Complex total_injection(0, 0);
    for (int r = 0; r < sol.powers.size(); ++r) total_injection += sol.powers(r);

    Complex losses(0, 0);
    for (const auto& line : net.lines) {
        const BranchAdmittance br = build_branch_admittance(line);
        const int i = net.node_index(line.from_node);
        const int j = net.node_index(line.to_node);
        const Vector3c vi = sol.voltages.segment<3>(3 * i);
        const Vector3c vj = sol.voltages.segment<3>(3 * j);
        for (Phase p : all_phases) {
            const Complex s_ij =
                line_power_flow(vi(phase_index(p)), branch_current(br, vi, vj, p));
            const BranchAdmittance rev{br.y_jj, br.y_ji, br.y_ij, br.y_ii};
            const Complex s_ji =
                line_power_flow(vj(phase_index(p)), branch_current(rev, vj, vi, p));
            losses += s_ij + s_ji;
        }
    }
    CHECK(std::abs(total_injection - losses) <= 1e-8);
}

TEST_CASE("sending-end flows around a node sum to its injection") {
    std::mt19937 rng(30);
    const Network net = make_random_network(rng, 4);
    const ComplexVector s = make_random_injections(rng, net);
    const PfSolution sol = solve_power_flow(net, s);

    const int node = 2;  // index; any non-slack interior node works
    for (Phase p : all_phases) {
        Complex out_flows(0, 0);
        for (const auto& line : net.lines) {
            const int i = net.node_index(line.from_node);
            const int j = net.node_index(line.to_node);
            if (i != node && j != node) continue;
            const BranchAdmittance br = build_branch_admittance(line);
            const Vector3c vi = sol.voltages.segment<3>(3 * i);
            const Vector3c vj = sol.voltages.segment<3>(3 * j);
            if (i == node) {
                out_flows += line_power_flow(vi(phase_index(p)), branch_current(br, vi, vj, p));
            } else {
                const BranchAdmittance rev{br.y_jj, br.y_ji, br.y_ij, br.y_ii};
                out_flows += line_power_flow(vj(phase_index(p)), branch_current(rev, vj, vi, p));
            }
        }
        CHECK(std::abs(out_flows - sol.powers(3 * node + phase_index(p))) <= 1e-8);
    }
}

TEST_CASE("nodal current injections: flat profile and two-node algebra") {
    std::mt19937 rng(6);
    const Network net = make_random_network(rng, 2);
    const GlobalAdmittance y = assemble_global_admittance(net);

    ComplexVector flat(6);
    for (int i = 0; i < 2; ++i)
        for (Phase p : all_phases) flat(net.row(i, p)) = balanced_phasor(p);
    CHECK(nodal_current_injections(y, flat).cwiseAbs().maxCoeff() <= 1e-10);

    ComplexVector v = flat;
    v(3) += Complex(0.01, -0.02);
    v(4) -= Complex(0.005, 0.004);
    const ComplexVector i_inj = nodal_current_injections(y, v);
    // I_1 = Z^-1 (V_1 - V_2) by block algebra (zero shunt)
    const Vector3c v1 = v.segment<3>(0), v2 = v.segment<3>(3);
    const Vector3c want = net.lines[0].z_series.partialPivLu().solve((v1 - v2).eval());
    CHECK((i_inj.segment<3>(0) - want).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("non-convergence reports the final mismatch") {
    const Network net = make_two_node(Complex(0.05, 0.02));
    ComplexVector s = ComplexVector::Zero(6);
    for (Phase p : all_phases) s(net.row(1, p)) = Complex(-150.0, 0.0);  // collapse
    CHECK_THROWS_AS(solve_power_flow(net, s), NumericalError);
}

TEST_CASE("voltage rise estimator basics") {
    TheveninEquivalent th{0.05, 0.02, 1.0};
    CHECK(estimate_voltage_rise(0.0, 0.0, th) == 0.0);
    CHECK(estimate_voltage_rise(1.0, 0.0, {0.05, 0.0, 1.0}) == doctest::Approx(0.05));
    CHECK_THROWS_AS(estimate_voltage_rise(1.0, 0.0, {0.05, 0.02, 0.0}), std::domain_error);
}

TEST_CASE("estimator within 15% of the exact rise for small injections") {
    const Complex z(0.05, 0.02);
    const Network net = make_two_node(z);
    const TheveninEquivalent th = extract_thevenin(net, 2, Phase::a);
    CHECK(th.r_th == doctest::Approx(0.05));
    CHECK(th.x_th == doctest::Approx(0.02));
    for (double p = 0.1; p <= 0.5 + 1e-9; p += 0.1) {
        ComplexVector s = ComplexVector::Zero(6);
        for (Phase ph : all_phases) s(net.row(1, ph)) = Complex(p, 0.0);
        const PfSolution sol = solve_power_flow(net, s);
        const double exact = std::abs(sol.voltage(net, 2, Phase::a)) - 1.0;
        const double approx = estimate_voltage_rise(p, 0.0, th);
        REQUIRE(std::abs(exact) <= 0.05);
        CHECK(std::abs(approx - exact) / std::abs(exact) < 0.15);
    }
}

TEST_CASE("Thevenin extraction accumulates the path impedance") {
    // chain 1-2-3-4 with known diagonal entries
    Network net;
    net.s_base = 1.0;
    net.v_base_phase = 1.0;
    net.units = UnitSystem::per_unit;
    for (int i = 0; i < 4; ++i) net.nodes.push_back({i + 1, 1.0, i == 0});
    Complex sum(0, 0);
    for (int i = 0; i < 3; ++i) {
        Line l;
        l.from_node = i + 1;
        l.to_node = i + 2;
        l.z_series = Matrix3c::Identity() * Complex(0.01 * (i + 1), 0.004 * (i + 1));
        l.y_shunt = Matrix3c::Zero();
        net.lines.push_back(l);
        sum += l.z_series(0, 0);
    }
    const TheveninEquivalent at_slack = extract_thevenin(net, 1, Phase::a);
    CHECK(at_slack.r_th == 0.0);
    CHECK(at_slack.x_th == 0.0);
    const TheveninEquivalent adjacent = extract_thevenin(net, 2, Phase::a);
    CHECK(adjacent.r_th == doctest::Approx(0.01));
    const TheveninEquivalent end = extract_thevenin(net, 4, Phase::a);
    CHECK(end.r_th == doctest::Approx(sum.real()));
    CHECK(end.x_th == doctest::Approx(sum.imag()));

    // meshed: close the loop
    Line loop;
    loop.from_node = 4;
    loop.to_node = 1;
    loop.z_series = Matrix3c::Identity() * Complex(0.01, 0.004);
    loop.y_shunt = Matrix3c::Zero();
    net.lines.push_back(loop);
    CHECK_THROWS_AS(extract_thevenin(net, 4, Phase::a), ValidationError);
}

TEST_CASE("warm start reuses a previous solution") {
    std::mt19937 rng(50);
    const Network net = make_random_network(rng, 4);
    const ComplexVector s = make_random_injections(rng, net);
    const PfSolution cold = solve_power_flow(net, s);
    PfOptions opt;
    opt.initial_voltages = cold.voltages;
    const PfSolution warm = solve_power_flow(net, s, opt);
    CHECK(warm.iterations <= 1);
    CHECK((warm.voltages - cold.voltages).cwiseAbs().maxCoeff() <= 1e-9);
}
