#pragma once

#include <Eigen/Dense>

#include "ubopf/nlp.hpp"

namespace ubopf {

enum class IpmStatus { optimal, iteration_limit, infeasible, numerical_failure };

struct IpmOptions {
    double tolerance = 1e-8;  // scaled KKT error
    int max_iterations = 500;
    double mu_init = 0.1;
    bool verbose = false;
};

struct IpmResult {
    Eigen::VectorXd x;
    Eigen::VectorXd y_eq;    // equality multipliers
    Eigen::VectorXd z_ineq;  // inequality multipliers (>= 0)
    Eigen::VectorXd slacks;
    IpmStatus status = IpmStatus::numerical_failure;
    int iterations = 0;
    double objective = 0.0;
    double kkt_stationarity = 0.0;      // scaled dual infeasibility
    double primal_infeasibility = 0.0;  // inf-norm of (h, g - s)
    double complementarity = 0.0;

    bool ok() const { return status == IpmStatus::optimal; }
};

/// Primal-dual interior-point method with slacks for all inequalities,
/// a monotone barrier schedule and an l1-penalty backtracking line search.
/// The condensed KKT system is solved by Cholesky with adaptive primal
/// regularization.
IpmResult solve_nlp(const NlpProblem& problem, const Eigen::VectorXd& x0,
                    const IpmOptions& options = {});

}  // namespace ubopf
