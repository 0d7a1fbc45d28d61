#include "ubopf/ipm.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace ubopf {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

double inf_norm(const VectorXd& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

// Fraction-to-boundary: largest alpha in (0, 1] with v + alpha*dv >= (1-tau)*v.
double max_step(const VectorXd& v, const VectorXd& dv, double tau) {
    double alpha = 1.0;
    for (int i = 0; i < v.size(); ++i)
        if (dv(i) < 0.0) alpha = std::min(alpha, -tau * v(i) / dv(i));
    return alpha;
}

struct Iterate {
    VectorXd x, s, y, z;
};

struct Residuals {
    VectorXd dual;    // grad f + Jh^T y - Jg^T z
    VectorXd eq;      // h(x)
    VectorXd ineq;    // g(x) - s
    VectorXd comp;    // s.*z - mu
    double theta;     // |eq|_1 + |ineq|_1
};

}  // namespace

IpmResult solve_nlp(const NlpProblem& p, const VectorXd& x0, const IpmOptions& opt) {
    const int me = p.num_eq();
    const int mi = p.num_ineq();

    IpmResult res;
    Iterate it;
    it.x = x0;
    it.y = VectorXd::Zero(me);

    double mu = mi > 0 ? opt.mu_init : 0.0;
    const double mu_min = opt.tolerance / 20.0;

    // Slacks start at the constraint values where comfortably positive.
    {
        VectorXd g = p.ineq_constraints(it.x);
        it.s = VectorXd(mi);
        it.z = VectorXd(mi);
        for (int i = 0; i < mi; ++i) {
            it.s(i) = std::max(1e-2, g(i));
            it.z(i) = std::max(mu, 1e-8) / it.s(i);
        }
    }

    auto eval_residuals = [&](const Iterate& w, double barrier) {
        Residuals r;
        VectorXd grad = p.objective_gradient(w.x);
        MatrixXd jh = p.eq_jacobian(w.x);
        MatrixXd jg = p.ineq_jacobian(w.x);
        r.dual = grad;
        if (me > 0) r.dual += jh.transpose() * w.y;
        if (mi > 0) r.dual -= jg.transpose() * w.z;
        r.eq = p.eq_constraints(w.x);
        r.ineq = mi > 0 ? VectorXd(p.ineq_constraints(w.x) - w.s) : VectorXd(0);
        r.comp = mi > 0 ? VectorXd((w.s.array() * w.z.array() - barrier).matrix()) : VectorXd(0);
        r.theta = r.eq.lpNorm<1>() + (mi > 0 ? r.ineq.lpNorm<1>() : 0.0);
        return r;
    };

    // Ipopt-style scaled optimality error.
    auto error = [&](const Residuals& r, const Iterate& w) {
        const double s_max = 100.0;
        const double mults = w.y.lpNorm<1>() + w.z.lpNorm<1>();
        const double denom = std::max(1, me + mi);
        const double sd = std::max(s_max, mults / denom) / s_max;
        const double sc = mi > 0 ? std::max(s_max, w.z.lpNorm<1>() / mi) / s_max : 1.0;
        double e = inf_norm(r.dual) / sd;
        e = std::max(e, inf_norm(r.eq));
        e = std::max(e, inf_norm(r.ineq));
        if (mi > 0) e = std::max(e, inf_norm(r.comp) / sc);
        return e;
    };

    auto barrier_value = [&](const Iterate& w) {
        double v = p.objective(w.x);
        for (int i = 0; i < mi; ++i) v -= mu * std::log(w.s(i));
        return v;
    };

    double delta_last = 0.0;
    double nu = 1.0;  // merit penalty weight
    double theta_best = std::numeric_limits<double>::infinity();
    double error_best = std::numeric_limits<double>::infinity();
    int last_progress = 0;
    int tiny_steps = 0;

    res.status = IpmStatus::iteration_limit;
    Residuals r = eval_residuals(it, mu);

    for (res.iterations = 0; res.iterations < opt.max_iterations; ++res.iterations) {
        // Convergence on the original (mu = 0) problem.
        Residuals r0 = r;
        if (mi > 0) r0.comp = (it.s.array() * it.z.array()).matrix();
        const double e0 = error(r0, it);
        if (e0 <= opt.tolerance) {
            res.status = IpmStatus::optimal;
            break;
        }

        if (r.theta < theta_best * (1.0 - 1e-6) || e0 < error_best * (1.0 - 1e-6)) {
            theta_best = std::min(theta_best, r.theta);
            error_best = std::min(error_best, e0);
            last_progress = res.iterations;
        }
        if (r.theta > std::max(100.0 * opt.tolerance, 1e-6) &&
            res.iterations - last_progress > 25) {
            res.status = IpmStatus::infeasible;
            break;
        }

        // Barrier update once the barrier subproblem is solved well enough.
        while (mi > 0 && mu > mu_min && error(r, it) <= 10.0 * mu) {
            mu = std::max(mu_min, std::min(0.2 * mu, std::pow(mu, 1.5)));
            r = eval_residuals(it, mu);
        }

        const MatrixXd jh = p.eq_jacobian(it.x);
        const MatrixXd jg = p.ineq_jacobian(it.x);
        const MatrixXd w_hess = p.lagrangian_hessian(it.x, it.y, it.z);

        VectorXd sigma(mi), rtilde = r.dual;
        MatrixXd h_base = w_hess;
        if (mi > 0) {
            sigma = (it.z.array() / it.s.array()).matrix();
            h_base += jg.transpose() * sigma.asDiagonal() * jg;
            // r_d + Jg^T S^-1 (r_c + Z r_g)
            rtilde += jg.transpose() *
                      ((r.comp.array() + it.z.array() * r.ineq.array()) / it.s.array()).matrix();
        }

        // Null-space step: split dx into a particular solution of the
        // linearized equalities plus a null-space move whose reduced
        // Hessian is made positive definite by a (usually zero) shift.
        const int nx = static_cast<int>(it.x.size());
        VectorXd dx, dy = VectorXd::Zero(me);
        bool step_ok = false;
        double delta = 0.0;

        auto ladder_llt = [&](const MatrixXd& m, Eigen::LLT<MatrixXd>& llt) {
            delta = 0.0;
            for (int attempt = 0; attempt < 40; ++attempt) {
                MatrixXd m_try = m;
                if (delta > 0.0) m_try.diagonal().array() += delta;
                llt.compute(m_try);
                if (llt.info() == Eigen::Success) return true;
                delta = delta == 0.0 ? std::max(1e-10, delta_last / 3.0) : delta * 10.0;
                if (delta > 1e14) return false;
            }
            return false;
        };

        if (me == 0) {
            Eigen::LLT<MatrixXd> llt;
            if (ladder_llt(h_base, llt)) {
                dx = -llt.solve(rtilde);
                step_ok = true;
            }
        } else {
            Eigen::ColPivHouseholderQR<MatrixXd> qr(jh.transpose());
            if (qr.rank() == me && me <= nx) {
                const MatrixXd q_full = qr.householderQ();
                const int nz = nx - me;
                // particular solution: Jh dx_p = -r_h
                const VectorXd rhs_perm = qr.colsPermutation().transpose() * (-r.eq);
                const VectorXd u_top = qr.matrixR()
                                           .topLeftCorner(me, me)
                                           .triangularView<Eigen::Upper>()
                                           .transpose()
                                           .solve(rhs_perm);
                const VectorXd dx_p = q_full.leftCols(me) * u_top;
                if (nz > 0) {
                    const MatrixXd z_basis = q_full.rightCols(nz);
                    const MatrixXd hz = z_basis.transpose() * h_base * z_basis;
                    Eigen::LLT<MatrixXd> llt;
                    if (ladder_llt(hz, llt)) {
                        const VectorXd rhs_z =
                            -(z_basis.transpose() * (rtilde + h_base * dx_p));
                        dx = dx_p + z_basis * llt.solve(rhs_z);
                        step_ok = true;
                    }
                } else {
                    dx = dx_p;
                    step_ok = true;
                }
                if (step_ok) dy = qr.solve(-(rtilde + h_base * dx));
            }
        }
        if (!step_ok) {
            // Losing factorability altogether while still infeasible is the
            // usual end state of an inconsistent constraint set.
            res.status = r.theta > std::max(100.0 * opt.tolerance, 1e-6)
                             ? IpmStatus::infeasible
                             : IpmStatus::numerical_failure;
            break;
        }
        delta_last = delta;

        VectorXd ds(mi), dz(mi);
        if (mi > 0) {
            ds = jg * dx + r.ineq;
            dz = -((r.comp.array() + it.z.array() * ds.array()) / it.s.array()).matrix();
        }

        if (!dx.allFinite() || (me > 0 && !dy.allFinite()) ||
            (mi > 0 && (!ds.allFinite() || !dz.allFinite()))) {
            res.status = IpmStatus::numerical_failure;
            break;
        }

        if (opt.verbose && res.iterations < 4) {
            int is = 0, iz = 0;
            double mds = 0, mdz = 0;
            for (int i = 0; i < mi; ++i) {
                if (std::abs(ds(i)) > mds) { mds = std::abs(ds(i)); is = i; }
                if (std::abs(dz(i)) > mdz) { mdz = std::abs(dz(i)); iz = i; }
            }
            std::printf("  dbg |dx|=%.3e |dy|=%.3e ds[%d]=%.3e (s=%.3e z=%.3e) dz[%d]=%.3e "
                        "(s=%.3e z=%.3e)\n",
                        dx.cwiseAbs().maxCoeff(), me ? dy.cwiseAbs().maxCoeff() : 0.0, is,
                        ds(is), it.s(is), it.z(is), iz, dz(iz), it.s(iz), it.z(iz));
        }

        const double tau = std::max(0.99, 1.0 - mu);
        const double alpha_s_max = mi > 0 ? max_step(it.s, ds, tau) : 1.0;
        const double alpha_z = mi > 0 ? max_step(it.z, dz, tau) : 1.0;

        // l1 merit line search on (x, s).
        const VectorXd grad_f = p.objective_gradient(it.x);
        double nu_req = 1.1 * std::max(inf_norm(it.y + dy), inf_norm(it.z + dz));
        nu = std::min(std::max(nu, nu_req), 1e10);
        double dphi = grad_f.dot(dx) - nu * r.theta;
        if (mi > 0) dphi -= mu * (ds.array() / it.s.array()).sum();
        if (dphi > 0.0) dphi = 0.0;

        const double phi0 = barrier_value(it) + nu * r.theta;
        double alpha = alpha_s_max;
        Iterate trial = it;
        bool accepted = false;
        for (int bt = 0; bt < 30; ++bt) {
            trial.x = it.x + alpha * dx;
            if (mi > 0) trial.s = it.s + alpha * ds;
            const Residuals rt = eval_residuals(trial, mu);
            double phi_t = p.objective(trial.x) + nu * rt.theta;
            bool s_ok = true;
            for (int i = 0; i < mi; ++i) {
                if (trial.s(i) <= 0.0) s_ok = false;
                else phi_t -= mu * std::log(trial.s(i));
            }
            if (s_ok && phi_t <= phi0 + 1e-4 * alpha * dphi) {
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!accepted) {
            // Keep moving with a conservative step; repeated failures end
            // the solve honestly below.
            alpha = 1e-10 * alpha_s_max;
            trial.x = it.x + alpha * dx;
            if (mi > 0) trial.s = it.s + alpha * ds;
            if (++tiny_steps >= 5) {
                res.status = r.theta > std::max(100.0 * opt.tolerance, 1e-6)
                                 ? IpmStatus::infeasible
                                 : IpmStatus::iteration_limit;
                ++res.iterations;
                it = trial;
                r = eval_residuals(it, mu);
                break;
            }
        } else {
            tiny_steps = 0;
        }

        it.x = trial.x;
        if (mi > 0) it.s = trial.s;
        if (me > 0) it.y += alpha * dy;
        if (mi > 0) {
            it.z += alpha_z * dz;
            // Keep duals consistent with the barrier parameter.
            const double kappa = 1e10;
            for (int i = 0; i < mi; ++i) {
                const double lo = std::max(1e-16, mu / (kappa * it.s(i)));
                const double hi = std::max(lo, kappa * std::max(mu, 1e-12) / it.s(i));
                it.z(i) = std::clamp(it.z(i), lo, hi);
            }
        }
        r = eval_residuals(it, mu);

        if (opt.verbose) {
            std::printf("ipm %4d mu=%8.2e err=%8.2e theta=%8.2e obj=%+12.6e d=%7.1e a=%5.3f "
                        "az=%5.3f rd=%8.2e rh=%8.2e rg=%8.2e rc=%8.2e |y|=%8.2e |z|=%8.2e "
                        "nu=%8.2e\n",
                        res.iterations, mu, error(r, it), r.theta, p.objective(it.x), delta,
                        alpha, alpha_z, inf_norm(r.dual), inf_norm(r.eq), inf_norm(r.ineq),
                        inf_norm(r.comp), inf_norm(it.y), inf_norm(it.z), nu);
        }
    }

    Residuals rf = eval_residuals(it, 0.0);
    if (res.status == IpmStatus::iteration_limit && error(rf, it) <= opt.tolerance)
        res.status = IpmStatus::optimal;
    res.x = it.x;
    res.y_eq = it.y;
    res.z_ineq = it.z;
    res.slacks = it.s;
    res.objective = p.objective(it.x);
    const double mults =
        std::max(100.0, (it.y.lpNorm<1>() + it.z.lpNorm<1>()) / std::max(1, me + mi)) / 100.0;
    res.kkt_stationarity = inf_norm(rf.dual) / mults;
    // True constraint violation: h and the negative part of g.
    double viol = inf_norm(rf.eq);
    if (mi > 0) {
        const VectorXd g = p.ineq_constraints(it.x);
        for (int i = 0; i < mi; ++i) viol = std::max(viol, std::max(0.0, -g(i)));
    }
    res.primal_infeasibility = viol;
    res.complementarity = mi > 0 ? inf_norm(rf.comp) : 0.0;
    return res;
}

}  // namespace ubopf
