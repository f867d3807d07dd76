#include "spamsim/lsq.hpp"

#include <algorithm>
#include <cmath>

namespace spamsim {

namespace {

void project(Eigen::VectorXd& p, const LsqOptions& o) {
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        if (o.lower.size() == p.size()) p[i] = std::max(p[i], o.lower[i]);
        if (o.upper.size() == p.size()) p[i] = std::min(p[i], o.upper[i]);
    }
}

}  // namespace

LsqResult levenberg_marquardt(const ResidualFn& fn, Eigen::VectorXd p, const LsqOptions& o) {
    project(p, o);
    const Eigen::Index m = p.size();
    Eigen::VectorXd r;
    Eigen::MatrixXd J;
    fn(p, r, J);
    double chi2 = r.squaredNorm();
    double lambda = 1e-3;

    LsqResult res;
    int it = 0;
    for (; it < o.max_iterations; ++it) {
        if (chi2 == 0.0) {
            res.converged = true;
            break;
        }
        const Eigen::MatrixXd A = J.transpose() * J;
        const Eigen::VectorXd g = J.transpose() * r;
        bool accepted = false;
        double step_norm = 0.0;
        double new_chi2 = chi2;
        while (lambda < 1e16) {
            Eigen::MatrixXd damped = A;
            for (Eigen::Index i = 0; i < m; ++i) damped(i, i) += lambda * std::max(A(i, i), 1e-30);
            Eigen::VectorXd step = damped.ldlt().solve(-g);
            Eigen::VectorXd trial = p + step;
            project(trial, o);
            Eigen::VectorXd r_trial;
            Eigen::MatrixXd J_trial;
            fn(trial, r_trial, J_trial);
            const double c = r_trial.squaredNorm();
            if (std::isfinite(c) && c <= chi2) {
                step_norm = (trial - p).norm() / (p.norm() + 1e-12);
                p = trial;
                r = r_trial;
                J = J_trial;
                new_chi2 = c;
                lambda = std::max(lambda / 10.0, 1e-12);
                accepted = true;
                break;
            }
            lambda *= 10.0;
        }
        if (!accepted) {
            // No downhill step at any damping: stationary point.
            res.converged = true;
            break;
        }
        const double rel = (chi2 - new_chi2) / std::max(chi2, 1e-300);
        chi2 = new_chi2;
        if (rel < o.tolerance && step_norm < std::sqrt(o.tolerance)) {
            res.converged = true;
            break;
        }
    }
    res.params = p;
    res.chi2 = chi2;
    res.iterations = it;
    const Eigen::MatrixXd A = J.transpose() * J;
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(A);
    res.covariance = cod.pseudoInverse();
    res.at_bound.assign(static_cast<std::size_t>(m), false);
    for (Eigen::Index i = 0; i < m; ++i) {
        const double scale = std::max(1.0, std::abs(p[i])) * 1e-12;
        if (o.lower.size() == m && p[i] <= o.lower[i] + scale) res.at_bound[i] = true;
        if (o.upper.size() == m && p[i] >= o.upper[i] - scale) res.at_bound[i] = true;
    }
    return res;
}

}  // namespace spamsim
