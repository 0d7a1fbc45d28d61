#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <numeric>
#include <random>

#include "ubopf/ipm.hpp"
#include "ubopf/nlp.hpp"

using namespace ubopf;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

QuadraticFunction random_quadratic(std::mt19937& rng, int n) {
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    QuadraticFunction f(n);
    for (int k = 0; k < 2 * n; ++k) {
        const int i = static_cast<int>(rng() % n), j = static_cast<int>(rng() % n);
        f.add_bilinear(i, j, u(rng));
    }
    for (int i = 0; i < n; ++i) f.add_linear(i, u(rng));
    f.add_constant(u(rng));
    return f;
}

// Rosenbrock objective constrained to the unit disc; exercises the IPM on
// a genuinely non-quadratic problem through the generic interface.
class RosenbrockDisc : public NlpProblem {
  public:
    int num_vars() const override { return 2; }
    int num_eq() const override { return 0; }
    int num_ineq() const override { return 1; }
    double objective(const VectorXd& v) const override {
        const double x = v(0), y = v(1);
        return (1 - x) * (1 - x) + 100 * (y - x * x) * (y - x * x);
    }
    VectorXd objective_gradient(const VectorXd& v) const override {
        const double x = v(0), y = v(1);
        VectorXd g(2);
        g(0) = -2 * (1 - x) - 400 * x * (y - x * x);
        g(1) = 200 * (y - x * x);
        return g;
    }
    VectorXd eq_constraints(const VectorXd&) const override { return VectorXd(0); }
    MatrixXd eq_jacobian(const VectorXd&) const override { return MatrixXd(0, 2); }
    VectorXd ineq_constraints(const VectorXd& v) const override {
        VectorXd g(1);
        g(0) = 1.0 - v.squaredNorm();
        return g;
    }
    MatrixXd ineq_jacobian(const VectorXd& v) const override {
        MatrixXd j(1, 2);
        j(0, 0) = -2 * v(0);
        j(0, 1) = -2 * v(1);
        return j;
    }
    MatrixXd lagrangian_hessian(const VectorXd& v, const VectorXd&,
                                const VectorXd& z) const override {
        const double x = v(0), y = v(1);
        MatrixXd h(2, 2);
        h(0, 0) = 2 - 400 * (y - x * x) + 800 * x * x;
        h(0, 1) = h(1, 0) = -400 * x;
        h(1, 1) = 200;
        h.diagonal().array() -= z(0) * (-2.0);
        return h;
    }
};

// Independent 1-D oracle for RosenbrockDisc: the optimum lies on the
// boundary; golden-section over the angle.
double rosenbrock_boundary_min() {
    auto f = [](double t) {
        const double x = std::cos(t), y = std::sin(t);
        return (1 - x) * (1 - x) + 100 * (y - x * x) * (y - x * x);
    };
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = 0.0, b = 1.5;  // first quadrant bracket
    double c = b - gr * (b - a), d = a + gr * (b - a);
    for (int i = 0; i < 200; ++i) {
        if (f(c) < f(d)) b = d;
        else a = c;
        c = b - gr * (b - a);
        d = a + gr * (b - a);
    }
    return f((a + b) / 2);
}

// Euclidean projection of `a` onto the probability simplex (sort-based).
VectorXd project_simplex(VectorXd a) {
    std::vector<double> u(a.data(), a.data() + a.size());
    std::sort(u.begin(), u.end(), std::greater<>());
    double css = 0.0, theta = 0.0;
    int rho = 0;
    double cum = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        cum += u[i];
        const double t = (cum - 1.0) / static_cast<double>(i + 1);
        if (u[i] - t > 0) {
            rho = static_cast<int>(i + 1);
            css = cum;
        }
    }
    theta = (css - 1.0) / rho;
    VectorXd x = a;
    for (int i = 0; i < x.size(); ++i) x(i) = std::max(0.0, a(i) - theta);
    return x;
}

}  // namespace

TEST_CASE("quadratic function value/gradient/hessian agree with finite differences") {
    std::mt19937 rng(1);
    for (int trial = 0; trial < 5; ++trial) {
        const int n = 4 + trial;
        const QuadraticFunction f = random_quadratic(rng, n);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        VectorXd x(n);
        for (int i = 0; i < n; ++i) x(i) = u(rng);

        VectorXd grad = VectorXd::Zero(n);
        f.add_gradient(x, grad);
        const double h = 1e-6;
        for (int i = 0; i < n; ++i) {
            VectorXd xp = x, xm = x;
            xp(i) += h;
            xm(i) -= h;
            const double fd = (f.value(xp) - f.value(xm)) / (2 * h);
            CHECK(grad(i) == doctest::Approx(fd).epsilon(1e-6));
        }

        MatrixXd hess = MatrixXd::Zero(n, n);
        f.add_hessian(1.0, hess);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                VectorXd xp = x, xm = x;
                xp(j) += h;
                xm(j) -= h;
                VectorXd gp = VectorXd::Zero(n), gm = VectorXd::Zero(n);
                f.add_gradient(xp, gp);
                f.add_gradient(xm, gm);
                CHECK(hess(i, j) == doctest::Approx((gp(i) - gm(i)) / (2 * h)).epsilon(1e-5));
            }
    }
}

TEST_CASE("equality QP has the closed-form KKT solution") {
    // min 0.5|x|^2 - a.x  s.t.  sum x = 1
    const int n = 5;
    VectorXd a(n);
    a << 0.3, -1.2, 0.7, 2.1, -0.4;
    QuadraticNlp nlp(n);
    for (int i = 0; i < n; ++i) {
        nlp.objective_function().add_bilinear(i, i, 0.5);
        nlp.objective_function().add_linear(i, -a(i));
    }
    QuadraticFunction h(n);
    for (int i = 0; i < n; ++i) h.add_linear(i, 1.0);
    h.add_constant(-1.0);
    nlp.add_equality(std::move(h));

    const IpmResult r = solve_nlp(nlp, VectorXd::Zero(n), {});
    REQUIRE(r.ok());
    const double lambda = (a.sum() - 1.0) / n;
    for (int i = 0; i < n; ++i) CHECK(r.x(i) == doctest::Approx(a(i) - lambda).epsilon(1e-7));
}

TEST_CASE("linear objective over the unit disc hits the boundary point") {
    // min -x - y  s.t.  x^2 + y^2 <= 1
    QuadraticNlp nlp(2);
    nlp.objective_function().add_linear(0, -1.0);
    nlp.objective_function().add_linear(1, -1.0);
    QuadraticFunction g(2);
    g.add_bilinear(0, 0, -1.0);
    g.add_bilinear(1, 1, -1.0);
    g.add_constant(1.0);
    nlp.add_inequality(std::move(g));

    const IpmResult r = solve_nlp(nlp, VectorXd::Zero(2), {});
    REQUIRE(r.ok());
    const double s2 = std::sqrt(0.5);
    CHECK(r.x(0) == doctest::Approx(s2).epsilon(1e-6));
    CHECK(r.x(1) == doctest::Approx(s2).epsilon(1e-6));
    CHECK(r.objective == doctest::Approx(-std::sqrt(2.0)).epsilon(1e-8));
}

TEST_CASE("simplex projection QP matches the sort-based oracle") {
    std::mt19937 rng(9);
    std::uniform_real_distribution<double> u(-1.0, 1.5);
    for (int trial = 0; trial < 8; ++trial) {
        const int n = 3 + trial % 4;
        VectorXd a(n);
        for (int i = 0; i < n; ++i) a(i) = u(rng);

        // min 0.5|x - a|^2  s.t.  sum x = 1, x >= 0
        QuadraticNlp nlp(n);
        for (int i = 0; i < n; ++i) {
            nlp.objective_function().add_bilinear(i, i, 0.5);
            nlp.objective_function().add_linear(i, -a(i));
        }
        QuadraticFunction h(n);
        for (int i = 0; i < n; ++i) h.add_linear(i, 1.0);
        h.add_constant(-1.0);
        nlp.add_equality(std::move(h));
        for (int i = 0; i < n; ++i) {
            QuadraticFunction g(n);
            g.add_linear(i, 1.0);
            nlp.add_inequality(std::move(g));
        }

        const IpmResult r = solve_nlp(nlp, VectorXd::Constant(n, 1.0 / n), {});
        REQUIRE(r.ok());
        const VectorXd want = project_simplex(a);
        CHECK((r.x - want).cwiseAbs().maxCoeff() < 1e-6);
    }
}

TEST_CASE("nonconvex objective is handled by regularization") {
    // min -|x|^2  s.t.  |x|^2 <= 1  -> objective -1 on the sphere
    const int n = 3;
    QuadraticNlp nlp(n);
    for (int i = 0; i < n; ++i) nlp.objective_function().add_bilinear(i, i, -1.0);
    QuadraticFunction g(n);
    for (int i = 0; i < n; ++i) g.add_bilinear(i, i, -1.0);
    g.add_constant(1.0);
    nlp.add_inequality(std::move(g));

    VectorXd x0(n);
    x0 << 0.3, 0.2, -0.1;
    const IpmResult r = solve_nlp(nlp, x0, {});
    REQUIRE(r.ok());
    CHECK(r.objective == doctest::Approx(-1.0).epsilon(1e-7));
    CHECK(r.x.norm() == doctest::Approx(1.0).epsilon(1e-7));
}

TEST_CASE("Rosenbrock on the unit disc matches the boundary oracle") {
    RosenbrockDisc prob;
    VectorXd x0(2);
    x0 << 0.1, 0.1;
    const IpmResult r = solve_nlp(prob, x0, {});
    REQUIRE(r.ok());
    CHECK(r.x.norm() == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(r.objective == doctest::Approx(rosenbrock_boundary_min()).epsilon(1e-6));
}

TEST_CASE("inconsistent constraints are reported infeasible") {
    // x = 0 and x >= 1
    QuadraticNlp nlp(1);
    nlp.objective_function().add_linear(0, 1.0);
    QuadraticFunction h(1);
    h.add_linear(0, 1.0);
    nlp.add_equality(std::move(h));
    QuadraticFunction g(1);
    g.add_linear(0, 1.0);
    g.add_constant(-1.0);
    nlp.add_inequality(std::move(g));

    const IpmResult r = solve_nlp(nlp, VectorXd::Zero(1), {});
    CHECK(r.status == IpmStatus::infeasible);
    CHECK(r.primal_infeasibility > 1e-3);
}

TEST_CASE("KKT residuals are reported at the solution") {
    QuadraticNlp nlp(2);
    nlp.objective_function().add_bilinear(0, 0, 1.0);
    nlp.objective_function().add_bilinear(1, 1, 1.0);
    QuadraticFunction h(2);
    h.add_linear(0, 1.0);
    h.add_linear(1, 1.0);
    h.add_constant(-2.0);
    nlp.add_equality(std::move(h));
    const IpmResult r = solve_nlp(nlp, VectorXd::Zero(2), {});
    REQUIRE(r.ok());
    CHECK(r.x(0) == doctest::Approx(1.0));
    CHECK(r.x(1) == doctest::Approx(1.0));
    CHECK(r.kkt_stationarity <= 1e-8);
    CHECK(r.primal_infeasibility <= 1e-8);
    // multiplier of the sum constraint: gradient 2x = -y * 1 => y = -2
    CHECK(r.y_eq(0) == doctest::Approx(-2.0).epsilon(1e-6));
}
