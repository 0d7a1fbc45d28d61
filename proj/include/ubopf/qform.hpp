#pragma once

#include <Eigen/Dense>
#include <map>
#include <utility>
#include <vector>

namespace ubopf {

/// Sparse quadratic function q(x) = 0.5 x^T Q x + b^T x + c with symmetric
/// Q. Every constraint and objective of the OPF is one of these, so exact
/// Jacobians and Hessians reduce to sparse accumulation.
class QuadraticFunction {
  public:
    QuadraticFunction() = default;
    explicit QuadraticFunction(int n) : n_(n), b_(Eigen::VectorXd::Zero(n)) {}

    int size() const { return n_; }

    /// Adds coef * x_i * x_j to the function value.
    void add_bilinear(int i, int j, double coef) {
        if (coef == 0.0) return;
        if (i == j)
            upper_[{i, i}] += 2.0 * coef;
        else if (i < j)
            upper_[{i, j}] += coef;
        else
            upper_[{j, i}] += coef;
    }

    /// Adds coef * x_i.
    void add_linear(int i, double coef) { b_(i) += coef; }

    void add_constant(double c) { c_ += c; }

    double value(const Eigen::VectorXd& x) const {
        double v = c_ + b_.dot(x);
        for (const auto& [ij, q] : upper_) {
            const auto [i, j] = ij;
            v += (i == j) ? 0.5 * q * x(i) * x(i) : q * x(i) * x(j);
        }
        return v;
    }

    /// gradient = Q x + b, written into `row` (accumulating).
    void add_gradient(const Eigen::VectorXd& x, Eigen::Ref<Eigen::VectorXd> row) const {
        row += b_;
        for (const auto& [ij, q] : upper_) {
            const auto [i, j] = ij;
            if (i == j) {
                row(i) += q * x(i);
            } else {
                row(i) += q * x(j);
                row(j) += q * x(i);
            }
        }
    }

    /// H += w * Q.
    void add_hessian(double w, Eigen::Ref<Eigen::MatrixXd> h) const {
        if (w == 0.0) return;
        for (const auto& [ij, q] : upper_) {
            const auto [i, j] = ij;
            h(i, j) += w * q;
            if (i != j) h(j, i) += w * q;
        }
    }

    bool is_linear() const { return upper_.empty(); }

    /// Multiplies the whole function (Q, b, c) by `factor`.
    void scale(double factor) {
        for (auto& [ij, q] : upper_) q *= factor;
        b_ *= factor;
        c_ *= factor;
    }

    double gradient_inf_norm(const Eigen::VectorXd& x) const {
        Eigen::VectorXd g = Eigen::VectorXd::Zero(n_);
        add_gradient(x, g);
        return g.size() == 0 ? 0.0 : g.cwiseAbs().maxCoeff();
    }

  private:
    int n_ = 0;
    // Upper-triangular entries of Q (i <= j).
    std::map<std::pair<int, int>, double> upper_;
    Eigen::VectorXd b_;
    double c_ = 0.0;
};

}  // namespace ubopf
