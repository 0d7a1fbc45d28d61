#include "ubopf/opf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "ubopf/admittance.hpp"
#include "ubopf/errors.hpp"
#include "ubopf/ipm.hpp"

namespace ubopf {

const char* strategy_name(Strategy s) {
    switch (s) {
        case Strategy::NoControl: return "no_control";
        case Strategy::ActiveOnly: return "p_only";
        case Strategy::ActiveReactive: return "pq";
    }
    return "?";
}

Strategy parse_strategy(const std::string& s) {
    if (s == "none" || s == "no_control") return Strategy::NoControl;
    if (s == "p" || s == "p_only") return Strategy::ActiveOnly;
    if (s == "pq" || s == "p_and_q") return Strategy::ActiveReactive;
    throw ParseError("unknown strategy '" + s + "' (expected none, p or pq)");
}

const char* opf_status_name(OpfStatus s) {
    switch (s) {
        case OpfStatus::optimal_local: return "optimal_local";
        case OpfStatus::infeasible: return "infeasible";
        case OpfStatus::iteration_limit: return "iteration_limit";
    }
    return "?";
}

int OptimizationProblem::pconv_index(int gen, int phase) const {
    return 6 * network.node_count() + 6 * gen + phase;
}
int OptimizationProblem::qconv_index(int gen, int phase) const {
    return 6 * network.node_count() + 6 * gen + 3 + phase;
}
int OptimizationProblem::ppv_index(int unit) const {
    return 6 * network.node_count() +
           6 * static_cast<int>(network.conventional_generators.size()) + 2 * unit;
}
int OptimizationProblem::qpv_index(int unit) const { return ppv_index(unit) + 1; }

namespace {

constexpr double kTieBreakEpsilon = 1e-6;

// Accumulates the terms of Re{V_r * conj(y * V_c)} (or Im with `im`),
// scaled by `sign`, into a quadratic function over rectangular voltages.
void add_power_terms(QuadraticFunction& q, int er, int fr, int ec, int fc, Complex y, double sign,
                     bool im) {
    const double g = y.real(), b = y.imag();
    if (!im) {
        q.add_bilinear(er, ec, sign * g);
        q.add_bilinear(er, fc, -sign * b);
        q.add_bilinear(fr, fc, sign * g);
        q.add_bilinear(fr, ec, sign * b);
    } else {
        q.add_bilinear(fr, ec, sign * g);
        q.add_bilinear(fr, fc, -sign * b);
        q.add_bilinear(er, fc, -sign * g);
        q.add_bilinear(er, ec, -sign * b);
    }
}

}  // namespace

OptimizationProblem build_problem(const Network& network, Strategy strategy) {
    const Network net_user = ensure_per_unit(network);
    require_valid(net_user);
    if (net_user.conventional_generators.empty())
        throw FormulationError("the optimization problem needs at least one conventional "
                               "generator (typically at the slack node)");

    OptimizationProblem prob;
    prob.network = net_user;
    prob.strategy = strategy;

    // Rebase the power unit so admittance entries land near 10.
    double y_abs_max = 1.0;
    const GlobalAdmittance y_user = assemble_global_admittance(net_user);
    for (const auto& [key, blk] : y_user.blocks()) {
        (void)key;
        y_abs_max = std::max(y_abs_max, blk.cwiseAbs().maxCoeff());
    }
    const double kappa = std::max(1.0, y_abs_max / 10.0);
    Network rebased_si = from_per_unit(net_user);
    rebased_si.s_base *= kappa;
    const Network net = to_per_unit(rebased_si);
    prob.network_internal = net;
    prob.power_rescale = kappa;

    const int n = net.node_count();
    const int n3 = 3 * n;
    const int ng = static_cast<int>(net.conventional_generators.size());
    const int npv = static_cast<int>(net.pv_inverters.size());
    const int nx = 6 * n + 6 * ng + 2 * npv;
    prob.structure.num_variables = nx;

    auto nlp = std::make_shared<QuadraticNlp>(nx);
    std::vector<QuadraticFunction> eqs, ineqs;
    const GlobalAdmittance y = assemble_global_admittance(net);
    const int slack = net.slack_index();

    auto e_of = [&](int row) { return row; };
    auto f_of = [&](int row) { return n3 + row; };

    // Net demand per stacked row.
    Eigen::VectorXd pd = Eigen::VectorXd::Zero(n3), qd = Eigen::VectorXd::Zero(n3);
    for (const auto& d : net.loads) {
        const int r = net.row(net.node_index(d.node), d.phase);
        pd(r) += d.p_demand;
        qd(r) += d.q_demand;
    }

    // Power balance, one P and one Q row per (node, phase):
    //   sum P_G - P_D - Re{V conj(Y V)} = 0 and the Im counterpart.
    for (int r = 0; r < n3; ++r) {
        QuadraticFunction hp(nx), hq(nx);
        const int node = r / 3;
        const int ph = r % 3;
        for (const auto& [key, blk] : y.blocks()) {
            if (key.first != node) continue;
            for (int psi = 0; psi < 3; ++psi) {
                const int c = 3 * key.second + psi;
                const Complex yv = blk(ph, psi);
                if (yv == Complex(0, 0)) continue;
                add_power_terms(hp, e_of(r), f_of(r), e_of(c), f_of(c), yv, -1.0, false);
                add_power_terms(hq, e_of(r), f_of(r), e_of(c), f_of(c), yv, -1.0, true);
            }
        }
        hp.add_constant(-pd(r));
        hq.add_constant(-qd(r));
        for (int k = 0; k < ng; ++k) {
            if (net.node_index(net.conventional_generators[k].node) != node) continue;
            hp.add_linear(prob.pconv_index(k, ph), 1.0);
            hq.add_linear(prob.qconv_index(k, ph), 1.0);
        }
        for (int u = 0; u < npv; ++u) {
            const auto& g = net.pv_inverters[u];
            if (net.node_index(g.node) != node || phase_index(g.phase) != ph) continue;
            hp.add_linear(prob.ppv_index(u), 1.0);
            hq.add_linear(prob.qpv_index(u), 1.0);
        }
        eqs.push_back(std::move(hp));
        eqs.push_back(std::move(hq));
        prob.structure.num_balance_eq += 2;
    }

    // Slack phasors held at balanced 1 pu.
    for (Phase p : all_phases) {
        const int r = net.row(slack, p);
        const Complex v = balanced_phasor(p);
        QuadraticFunction fe(nx), ff(nx);
        fe.add_linear(e_of(r), 1.0);
        fe.add_constant(-v.real());
        ff.add_linear(f_of(r), 1.0);
        ff.add_constant(-v.imag());
        eqs.push_back(std::move(fe));
        eqs.push_back(std::move(ff));
        prob.structure.num_slack_fix_eq += 2;
    }

    // Strategy constraints on the inverters.
    if (strategy == Strategy::ActiveOnly || strategy == Strategy::NoControl) {
        for (int u = 0; u < npv; ++u) {
            QuadraticFunction fq(nx);
            fq.add_linear(prob.qpv_index(u), 1.0);
            eqs.push_back(std::move(fq));
            ++prob.structure.num_qpv_zero_eq;
        }
    }
    if (strategy == Strategy::NoControl) {
        for (int u = 0; u < npv; ++u) {
            QuadraticFunction fp(nx);
            fp.add_linear(prob.ppv_index(u), 1.0);
            fp.add_constant(-net.pv_inverters[u].s_available);
            eqs.push_back(std::move(fp));
            ++prob.structure.num_ppv_fix_eq;
        }
    }

    // Voltage magnitude window, squared, on non-slack nodes.
    const double vmin2 = net.limits.v_min * net.limits.v_min;
    const double vmax2 = net.limits.v_max * net.limits.v_max;
    for (int r = 0; r < n3; ++r) {
        if (r / 3 == slack) continue;
        QuadraticFunction lo(nx), hi(nx);
        lo.add_bilinear(e_of(r), e_of(r), 1.0);
        lo.add_bilinear(f_of(r), f_of(r), 1.0);
        lo.add_constant(-vmin2);
        hi.add_bilinear(e_of(r), e_of(r), -1.0);
        hi.add_bilinear(f_of(r), f_of(r), -1.0);
        hi.add_constant(vmax2);
        ineqs.push_back(std::move(lo));
        ineqs.push_back(std::move(hi));
        prob.structure.num_voltage_ineq += 2;
    }

    // Conventional generator boxes.
    for (int k = 0; k < ng; ++k) {
        const auto& g = net.conventional_generators[k];
        for (int ph = 0; ph < 3; ++ph) {
            const int ip = prob.pconv_index(k, ph), iq = prob.qconv_index(k, ph);
            QuadraticFunction a(nx), b(nx), c(nx), d(nx);
            a.add_linear(ip, 1.0);
            a.add_constant(-g.p_min);
            b.add_linear(ip, -1.0);
            b.add_constant(g.p_max);
            c.add_linear(iq, 1.0);
            c.add_constant(-g.q_min);
            d.add_linear(iq, -1.0);
            d.add_constant(g.q_max);
            ineqs.push_back(std::move(a));
            ineqs.push_back(std::move(b));
            ineqs.push_back(std::move(c));
            ineqs.push_back(std::move(d));
            prob.structure.num_gen_box_ineq += 4;
        }
    }

    // Inverter capability: the apparent-power semicircle, or its
    // unity-power-factor reduction P <= S.
    if (strategy == Strategy::ActiveReactive) {
        for (int u = 0; u < npv; ++u) {
            const double s = net.pv_inverters[u].s_available;
            QuadraticFunction disc(nx);
            disc.add_bilinear(prob.ppv_index(u), prob.ppv_index(u), -1.0);
            disc.add_bilinear(prob.qpv_index(u), prob.qpv_index(u), -1.0);
            disc.add_constant(s * s);
            ineqs.push_back(std::move(disc));
            ++prob.structure.num_disc_ineq;
        }
    } else if (strategy == Strategy::ActiveOnly) {
        for (int u = 0; u < npv; ++u) {
            QuadraticFunction up(nx);
            up.add_linear(prob.ppv_index(u), -1.0);
            up.add_constant(net.pv_inverters[u].s_available);
            ineqs.push_back(std::move(up));
            ++prob.structure.num_ppv_upper_ineq;
        }
    }
    if (strategy != Strategy::NoControl) {
        for (int u = 0; u < npv; ++u) {
            QuadraticFunction nn(nx);
            nn.add_linear(prob.ppv_index(u), 1.0);
            ineqs.push_back(std::move(nn));
            ++prob.structure.num_ppv_nonneg_ineq;
        }
    }

    // Active power flow limits on lines that declare one.
    for (const auto& line : net.lines) {
        if (!line.p_flow_max) continue;
        const BranchAdmittance br = build_branch_admittance(line);
        const int i = net.node_index(line.from_node);
        const int j = net.node_index(line.to_node);
        for (int ph = 0; ph < 3; ++ph) {
            const int r = 3 * i + ph;
            QuadraticFunction up(nx), dn(nx);  // Pmax - flow >= 0, flow + Pmax >= 0
            for (int psi = 0; psi < 3; ++psi) {
                const int ci = 3 * i + psi, cj = 3 * j + psi;
                add_power_terms(up, e_of(r), f_of(r), e_of(ci), f_of(ci), br.y_ii(ph, psi), -1.0,
                                false);
                add_power_terms(up, e_of(r), f_of(r), e_of(cj), f_of(cj), br.y_ij(ph, psi), -1.0,
                                false);
                add_power_terms(dn, e_of(r), f_of(r), e_of(ci), f_of(ci), br.y_ii(ph, psi), 1.0,
                                false);
                add_power_terms(dn, e_of(r), f_of(r), e_of(cj), f_of(cj), br.y_ij(ph, psi), 1.0,
                                false);
            }
            up.add_constant(*line.p_flow_max);
            dn.add_constant(*line.p_flow_max);
            ineqs.push_back(std::move(up));
            ineqs.push_back(std::move(dn));
            prob.structure.num_flow_ineq += 2;
        }
    }

    // Objective: linear conventional cost, scaled to unit gradient, plus a
    // tiny tie-breaker that spreads curtailment across inverters.
    double max_cost = 1.0;
    for (const auto& g : net.conventional_generators) max_cost = std::max(max_cost, g.cost);
    prob.objective_scale = max_cost;
    auto& obj = nlp->objective_function();
    for (int k = 0; k < ng; ++k)
        for (int ph = 0; ph < 3; ++ph)
            obj.add_linear(prob.pconv_index(k, ph),
                           net.conventional_generators[k].cost / prob.objective_scale);
    if (strategy != Strategy::NoControl) {
        // Tie-break on user-pu quantities: epsilon * (S - P)^2 expressed
        // over the internal variable P_tilde = P / kappa.
        for (int u = 0; u < npv; ++u) {
            const double s = net_user.pv_inverters[u].s_available;
            obj.add_bilinear(prob.ppv_index(u), prob.ppv_index(u),
                             kTieBreakEpsilon * kappa * kappa);
            obj.add_linear(prob.ppv_index(u), -2.0 * kTieBreakEpsilon * kappa * s);
            obj.add_constant(kTieBreakEpsilon * s * s);
        }
    }

    // Gradient-based row scaling (evaluated at the flat start) keeps the
    // large admittance coefficients of the balance rows from swamping the
    // unit-coefficient box rows.
    prob.nlp = nlp;
    const Eigen::VectorXd x0 = prob.initial_point();
    constexpr double kMaxGradient = 100.0;
    for (auto& row : eqs) {
        const double g = row.gradient_inf_norm(x0);
        const double s = g > kMaxGradient ? kMaxGradient / g : 1.0;
        row.scale(s);
        prob.eq_scales.push_back(s);
        nlp->add_equality(std::move(row));
    }
    for (auto& row : ineqs) {
        const double g = row.gradient_inf_norm(x0);
        const double s = g > kMaxGradient ? kMaxGradient / g : 1.0;
        row.scale(s);
        prob.ineq_scales.push_back(s);
        nlp->add_inequality(std::move(row));
    }
    return prob;
}

Eigen::VectorXd OptimizationProblem::initial_point(double pv_fraction) const {
    const Network& net = network_internal;
    const int n = net.node_count();
    const int ng = static_cast<int>(net.conventional_generators.size());
    const int npv = static_cast<int>(net.pv_inverters.size());
    Eigen::VectorXd x = Eigen::VectorXd::Zero(structure.num_variables);

    for (int i = 0; i < n; ++i)
        for (Phase p : all_phases) {
            const Complex v = balanced_phasor(p);
            x(net.row(i, p)) = v.real();
            x(3 * n + net.row(i, p)) = v.imag();
        }

    std::array<double, 3> pv_init_phase{}, pd_phase{}, qd_phase{};
    for (int u = 0; u < npv; ++u) {
        const auto& g = net.pv_inverters[u];
        const double p0 =
            strategy == Strategy::NoControl ? g.s_available : pv_fraction * g.s_available;
        x(ppv_index(u)) = p0;
        x(qpv_index(u)) = 0.0;
        pv_init_phase[phase_index(g.phase)] += p0;
    }
    for (const auto& d : net.loads) {
        pd_phase[phase_index(d.phase)] += d.p_demand;
        qd_phase[phase_index(d.phase)] += d.q_demand;
    }
    for (int k = 0; k < ng; ++k) {
        const auto& g = net.conventional_generators[k];
        for (int ph = 0; ph < 3; ++ph) {
            const double p_est = (pd_phase[ph] - pv_init_phase[ph]) / ng;
            const double q_est = qd_phase[ph] / ng;
            x(pconv_index(k, ph)) = std::clamp(p_est, g.p_min, g.p_max);
            x(qconv_index(k, ph)) = std::clamp(q_est, g.q_min, g.q_max);
        }
    }
    return x;
}

namespace {

double solution_violation(const Network& net, const OpfSolution& solution);

OpfSolution extract_solution(const OptimizationProblem& prob, const IpmResult& ipm,
                             OpfStatus status) {
    const Network& net = prob.network;  // user pu
    const double rescale = prob.power_rescale;
    const int n = net.node_count();
    OpfSolution sol;
    sol.strategy = prob.strategy;
    sol.status = status;
    sol.voltages = ComplexVector(3 * n);
    for (int r = 0; r < 3 * n; ++r) sol.voltages(r) = Complex(ipm.x(r), ipm.x(3 * n + r));
    double cost = 0.0;
    for (std::size_t k = 0; k < net.conventional_generators.size(); ++k) {
        OpfSolution::ConvInjection inj;
        inj.node = net.conventional_generators[k].node;
        for (int ph = 0; ph < 3; ++ph) {
            inj.p[ph] = rescale * ipm.x(prob.pconv_index(static_cast<int>(k), ph));
            inj.q[ph] = rescale * ipm.x(prob.qconv_index(static_cast<int>(k), ph));
            cost += net.conventional_generators[k].cost * inj.p[ph];
        }
        sol.conventional.push_back(inj);
    }
    for (std::size_t u = 0; u < net.pv_inverters.size(); ++u) {
        OpfSolution::PvInjection inj;
        inj.node = net.pv_inverters[u].node;
        inj.phase = net.pv_inverters[u].phase;
        inj.p = rescale * ipm.x(prob.ppv_index(static_cast<int>(u)));
        inj.q = rescale * ipm.x(prob.qpv_index(static_cast<int>(u)));
        inj.s_available = net.pv_inverters[u].s_available;
        sol.pv.push_back(inj);
    }
    sol.objective = cost;
    sol.kkt_stationarity = ipm.kkt_stationarity;
    sol.max_constraint_violation = ipm.primal_infeasibility;
    sol.iterations = ipm.iterations;
    return sol;
}

}  // namespace

double OpfSolution::max_voltage_pu() const {
    double vmax = 0.0;
    for (int r = 0; r < voltages.size(); ++r) vmax = std::max(vmax, std::abs(voltages(r)));
    return vmax;
}

double OpfSolution::total_pv_p() const {
    double s = 0.0;
    for (const auto& g : pv) s += g.p;
    return s;
}

OpfSolution solve(const OptimizationProblem& problem, const SolveOptions& options) {
    IpmOptions iopt;
    iopt.tolerance = options.tolerance;
    iopt.max_iterations = options.max_iterations;
    iopt.verbose = options.verbose;

    const int starts =
        problem.strategy == Strategy::NoControl ? 1 : std::max(1, options.multistart);
    std::mt19937 rng(options.seed);
    std::uniform_real_distribution<double> jitter(-options.start_perturbation,
                                                  options.start_perturbation);

    std::optional<OpfSolution> best_opt;
    std::optional<OpfSolution> best_any;
    double best_any_viol = std::numeric_limits<double>::infinity();
    bool saw_infeasible = false;
    int used = 0;

    for (int s = 0; s < starts; ++s) {
        const double frac = s == 0 ? 0.9 : 0.9 * (1.0 + jitter(rng));
        Eigen::VectorXd x0 = problem.initial_point(frac);
        const IpmResult r = solve_nlp(*problem.nlp, x0, iopt);
        ++used;
        if (r.status == IpmStatus::infeasible) saw_infeasible = true;
        OpfSolution cand = extract_solution(
            problem, r, r.status == IpmStatus::optimal ? OpfStatus::optimal_local
                                                       : OpfStatus::iteration_limit);
        // Violations measured on the caller's network, in its pu.
        cand.max_constraint_violation = solution_violation(problem.network, cand);
        if (r.status == IpmStatus::optimal &&
            cand.max_constraint_violation <= options.feasibility_tol) {
            if (!best_opt || cand.objective < best_opt->objective) best_opt = std::move(cand);
        } else if (cand.max_constraint_violation < best_any_viol) {
            best_any_viol = cand.max_constraint_violation;
            best_any = std::move(cand);
        }
    }

    if (best_opt) {
        best_opt->status = OpfStatus::optimal_local;
        best_opt->starts_used = used;
        return *best_opt;
    }
    best_any->status = saw_infeasible ? OpfStatus::infeasible : OpfStatus::iteration_limit;
    best_any->starts_used = used;
    return *best_any;
}

double VerificationReport::max_violation() const {
    double worst = 0.0;
    for (const auto& [_, v] : family_violation) worst = std::max(worst, v);
    return worst;
}

namespace {

// Net generation minus demand per stacked row, user pu.
void solution_injections(const Network& net, const OpfSolution& solution, Eigen::VectorXd& pg,
                         Eigen::VectorXd& qg) {
    const int n3 = 3 * net.node_count();
    pg = Eigen::VectorXd::Zero(n3);
    qg = Eigen::VectorXd::Zero(n3);
    for (const auto& inj : solution.conventional) {
        const int node = net.node_index(inj.node);
        for (int ph = 0; ph < 3; ++ph) {
            pg(3 * node + ph) += inj.p[ph];
            qg(3 * node + ph) += inj.q[ph];
        }
    }
    for (const auto& inj : solution.pv) {
        const int r = net.row(net.node_index(inj.node), inj.phase);
        pg(r) += inj.p;
        qg(r) += inj.q;
    }
    for (const auto& d : net.loads) {
        const int r = net.row(net.node_index(d.node), d.phase);
        pg(r) -= d.p_demand;
        qg(r) -= d.q_demand;
    }
}

// Max violation per constraint family, recomputed from the solution
// values through the admittance module.
std::map<std::string, double> family_violations(const Network& net, const OpfSolution& solution) {
    const int n3 = 3 * net.node_count();
    const int slack = net.slack_index();
    std::map<std::string, double> fam;

    const GlobalAdmittance y = assemble_global_admittance(net);
    const ComplexVector& v = solution.voltages;
    const ComplexVector s_inj = nodal_power_injections(v, y.multiply(v));

    Eigen::VectorXd pg, qg;
    solution_injections(net, solution, pg, qg);

    double bal_p = 0.0, bal_q = 0.0;
    for (int r = 0; r < n3; ++r) {
        bal_p = std::max(bal_p, std::abs(pg(r) - s_inj(r).real()));
        bal_q = std::max(bal_q, std::abs(qg(r) - s_inj(r).imag()));
    }
    fam["p_balance"] = bal_p;
    fam["q_balance"] = bal_q;

    double v_viol = 0.0;
    for (int r = 0; r < n3; ++r) {
        if (r / 3 == slack) continue;
        const double mag = std::abs(v(r));
        v_viol = std::max({v_viol, mag - net.limits.v_max, net.limits.v_min - mag});
    }
    fam["voltage_bounds"] = std::max(0.0, v_viol);

    double slack_viol = 0.0;
    for (Phase p : all_phases)
        slack_viol = std::max(slack_viol, std::abs(v(net.row(slack, p)) - balanced_phasor(p)));
    fam["slack_phasor"] = slack_viol;

    double box = 0.0;
    for (std::size_t k = 0; k < solution.conventional.size(); ++k) {
        const auto& g = net.conventional_generators[k];
        const auto& inj = solution.conventional[k];
        for (int ph = 0; ph < 3; ++ph) {
            box = std::max({box, g.p_min - inj.p[ph], inj.p[ph] - g.p_max, g.q_min - inj.q[ph],
                            inj.q[ph] - g.q_max});
        }
    }
    fam["generator_bounds"] = std::max(0.0, box);

    double disc = 0.0, qzero = 0.0, pneg = 0.0, pover = 0.0;
    for (const auto& inj : solution.pv) {
        disc = std::max(disc, inj.p * inj.p + inj.q * inj.q - inj.s_available * inj.s_available);
        if (solution.strategy != Strategy::ActiveReactive) qzero = std::max(qzero, std::abs(inj.q));
        pneg = std::max(pneg, -inj.p);
        if (solution.strategy == Strategy::ActiveOnly)
            pover = std::max(pover, inj.p - inj.s_available);
    }
    fam["pv_disc"] = std::max(0.0, disc);
    if (solution.strategy != Strategy::ActiveReactive) fam["pv_q_zero"] = qzero;
    fam["pv_p_nonnegative"] = std::max(0.0, pneg);
    if (solution.strategy == Strategy::ActiveOnly) fam["pv_p_upper"] = std::max(0.0, pover);

    double flow = 0.0;
    bool any_limited = false;
    for (const auto& line : net.lines) {
        if (!line.p_flow_max) continue;
        any_limited = true;
        const BranchAdmittance br = build_branch_admittance(line);
        const int i = net.node_index(line.from_node);
        const int j = net.node_index(line.to_node);
        const Vector3c vi = v.segment<3>(3 * i), vj = v.segment<3>(3 * j);
        for (Phase p : all_phases) {
            const Complex s = line_power_flow(vi(phase_index(p)), branch_current(br, vi, vj, p));
            flow = std::max(flow, std::abs(s.real()) - *line.p_flow_max);
        }
    }
    if (any_limited) fam["line_flow"] = std::max(0.0, flow);
    return fam;
}

double solution_violation(const Network& net, const OpfSolution& solution) {
    double worst = 0.0;
    for (const auto& [_, v] : family_violations(net, solution)) worst = std::max(worst, v);
    return worst;
}

}  // namespace

VerificationReport verify_solution(const Network& network, const OpfSolution& solution,
                                   double tolerance) {
    if (solution.status != OpfStatus::optimal_local)
        throw ValidationError("verify_solution requires a solution with status optimal_local");

    const Network net = ensure_per_unit(network);
    const int n3 = 3 * net.node_count();
    VerificationReport rep;
    rep.family_violation = family_violations(net, solution);

    // Independent re-simulation: fix the solution's net injections and
    // let the Newton power flow reproduce the voltages.
    try {
        Eigen::VectorXd pg, qg;
        solution_injections(net, solution, pg, qg);
        ComplexVector inj(n3);
        for (int r = 0; r < n3; ++r) inj(r) = Complex(pg(r), qg(r));
        PfOptions pfo;
        pfo.tolerance = 1e-11;
        pfo.initial_voltages = solution.voltages;
        const PfSolution pf = solve_power_flow(net, inj, pfo);
        rep.pf_voltage_gap = (pf.voltages - solution.voltages).cwiseAbs().maxCoeff();
    } catch (const NumericalError& e) {
        rep.pf_voltage_gap = std::numeric_limits<double>::infinity();
        rep.failures.push_back(std::string("pf_cross_check: ") + e.what());
    }

    rep.passed = true;
    for (const auto& [family, viol] : rep.family_violation) {
        if (viol > tolerance) {
            rep.passed = false;
            std::ostringstream os;
            os << family << ": violation " << viol << " exceeds " << tolerance;
            rep.failures.push_back(os.str());
        }
    }
    if (rep.pf_voltage_gap > tolerance) {
        rep.passed = false;
        if (rep.pf_voltage_gap > 1e-5) {
            std::ostringstream os;
            os << "pf_cross_check: voltage disagreement " << rep.pf_voltage_gap;
            rep.failures.push_back(os.str());
        }
    }
    return rep;
}

CurtailmentReport compute_curtailment(const Network& network, const OpfSolution& solution,
                                      const OpfSolution* comparison) {
    const Network net = ensure_per_unit(network);
    const double to_w = net.s_base;
    CurtailmentReport rep;
    rep.tie_break_epsilon = kTieBreakEpsilon;
    double avail = 0.0, inj = 0.0;
    for (std::size_t u = 0; u < solution.pv.size(); ++u) {
        const auto& g = solution.pv[u];
        avail += g.s_available;
        inj += g.p;
        InverterBreakdown b;
        b.node = g.node;
        b.phase = g.phase;
        b.p_w = g.p * to_w;
        b.q_var = g.q * to_w;
        b.s_available_va = g.s_available * to_w;
        if (comparison && u < comparison->pv.size())
            b.delta_p_w = (g.p - comparison->pv[u].p) * to_w;
        rep.per_inverter.push_back(b);
    }
    rep.p_available_kw = avail * to_w / 1000.0;
    rep.p_injected_kw = inj * to_w / 1000.0;
    rep.p_curtailed_kw = rep.p_available_kw - rep.p_injected_kw;
    rep.curtailed_percent =
        rep.p_available_kw > 0.0 ? 100.0 * rep.p_curtailed_kw / rep.p_available_kw : 0.0;
    rep.v_max_pu = solution.max_voltage_pu();
    return rep;
}

CurtailmentReport compute_curtailment_no_control(const Network& network,
                                                 const PfSolution& pf_solution) {
    const Network net = ensure_per_unit(network);
    const double to_w = net.s_base;
    CurtailmentReport rep;
    rep.tie_break_epsilon = 0.0;
    double avail = 0.0;
    for (const auto& g : net.pv_inverters) {
        avail += g.s_available;
        InverterBreakdown b;
        b.node = g.node;
        b.phase = g.phase;
        b.p_w = g.s_available * to_w;
        b.q_var = 0.0;
        b.s_available_va = g.s_available * to_w;
        rep.per_inverter.push_back(b);
    }
    rep.p_available_kw = avail * to_w / 1000.0;
    rep.p_injected_kw = rep.p_available_kw;
    rep.p_curtailed_kw = 0.0;
    rep.curtailed_percent = 0.0;
    rep.v_max_pu = pf_solution.voltages.cwiseAbs().maxCoeff();
    return rep;
}

}  // namespace ubopf
