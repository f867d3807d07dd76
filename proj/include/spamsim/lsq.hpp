#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

namespace spamsim {

/// Weighted residuals r(p) and their Jacobian dr/dp.
using ResidualFn = std::function<void(const Eigen::VectorXd& params, Eigen::VectorXd& residuals,
                                      Eigen::MatrixXd& jacobian)>;

struct LsqOptions {
    int max_iterations = 500;
    double tolerance = 1e-14;  ///< relative chi² change and step size
    Eigen::VectorXd lower;     ///< empty = unbounded
    Eigen::VectorXd upper;
};

struct LsqResult {
    Eigen::VectorXd params;
    Eigen::MatrixXd covariance;  ///< (JᵀJ)⁻¹ at the solution
    double chi2 = 0.0;
    int iterations = 0;
    bool converged = false;
    std::vector<bool> at_bound;
};

/// Levenberg-Marquardt with box constraints by projection.
LsqResult levenberg_marquardt(const ResidualFn& fn, Eigen::VectorXd start, const LsqOptions& options = {});

}  // namespace spamsim
