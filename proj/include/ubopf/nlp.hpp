#pragma once

#include <Eigen/Dense>
#include <vector>

#include "ubopf/qform.hpp"

namespace ubopf {

/// Smooth nonlinear program in the canonical form
///   min f(x)  s.t.  h(x) = 0,  g(x) >= 0.
/// Dense derivative interfaces; sized for a few hundred variables.
class NlpProblem {
  public:
    virtual ~NlpProblem() = default;

    virtual int num_vars() const = 0;
    virtual int num_eq() const = 0;
    virtual int num_ineq() const = 0;

    virtual double objective(const Eigen::VectorXd& x) const = 0;
    virtual Eigen::VectorXd objective_gradient(const Eigen::VectorXd& x) const = 0;

    virtual Eigen::VectorXd eq_constraints(const Eigen::VectorXd& x) const = 0;
    virtual Eigen::MatrixXd eq_jacobian(const Eigen::VectorXd& x) const = 0;

    virtual Eigen::VectorXd ineq_constraints(const Eigen::VectorXd& x) const = 0;
    virtual Eigen::MatrixXd ineq_jacobian(const Eigen::VectorXd& x) const = 0;

    /// W = grad^2 f + sum_k y_k grad^2 h_k - sum_k z_k grad^2 g_k.
    virtual Eigen::MatrixXd lagrangian_hessian(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                                               const Eigen::VectorXd& z) const = 0;
};

/// NLP whose objective and every constraint are QuadraticFunction values;
/// derivatives are exact by construction.
class QuadraticNlp : public NlpProblem {
  public:
    explicit QuadraticNlp(int n) : n_(n), objective_(n) {}

    QuadraticFunction& objective_function() { return objective_; }
    const QuadraticFunction& objective_function() const { return objective_; }

    /// Appends h_k(x) = 0; returns its row index.
    int add_equality(QuadraticFunction f) {
        eq_.push_back(std::move(f));
        return static_cast<int>(eq_.size()) - 1;
    }
    /// Appends g_k(x) >= 0; returns its row index.
    int add_inequality(QuadraticFunction f) {
        ineq_.push_back(std::move(f));
        return static_cast<int>(ineq_.size()) - 1;
    }

    int num_vars() const override { return n_; }
    int num_eq() const override { return static_cast<int>(eq_.size()); }
    int num_ineq() const override { return static_cast<int>(ineq_.size()); }

    double objective(const Eigen::VectorXd& x) const override { return objective_.value(x); }

    Eigen::VectorXd objective_gradient(const Eigen::VectorXd& x) const override {
        Eigen::VectorXd g = Eigen::VectorXd::Zero(n_);
        objective_.add_gradient(x, g);
        return g;
    }

    Eigen::VectorXd eq_constraints(const Eigen::VectorXd& x) const override {
        return values(eq_, x);
    }
    Eigen::MatrixXd eq_jacobian(const Eigen::VectorXd& x) const override {
        return jacobian(eq_, x);
    }
    Eigen::VectorXd ineq_constraints(const Eigen::VectorXd& x) const override {
        return values(ineq_, x);
    }
    Eigen::MatrixXd ineq_jacobian(const Eigen::VectorXd& x) const override {
        return jacobian(ineq_, x);
    }

    Eigen::MatrixXd lagrangian_hessian(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                                       const Eigen::VectorXd& z) const override {
        (void)x;  // all Hessians are constant
        Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n_, n_);
        objective_.add_hessian(1.0, h);
        for (int k = 0; k < num_eq(); ++k) eq_[k].add_hessian(y(k), h);
        for (int k = 0; k < num_ineq(); ++k) ineq_[k].add_hessian(-z(k), h);
        return h;
    }

  private:
    static Eigen::VectorXd values(const std::vector<QuadraticFunction>& fs,
                                  const Eigen::VectorXd& x) {
        Eigen::VectorXd v(fs.size());
        for (std::size_t k = 0; k < fs.size(); ++k) v(static_cast<int>(k)) = fs[k].value(x);
        return v;
    }
    static Eigen::MatrixXd jacobian(const std::vector<QuadraticFunction>& fs,
                                    const Eigen::VectorXd& x) {
        Eigen::MatrixXd j = Eigen::MatrixXd::Zero(static_cast<int>(fs.size()), x.size());
        for (std::size_t k = 0; k < fs.size(); ++k) {
            Eigen::VectorXd row = Eigen::VectorXd::Zero(x.size());
            fs[k].add_gradient(x, row);
            j.row(static_cast<int>(k)) = row;
        }
        return j;
    }

    int n_;
    QuadraticFunction objective_;
    std::vector<QuadraticFunction> eq_;
    std::vector<QuadraticFunction> ineq_;
};

}  // namespace ubopf
