#include "hsa/gradcheck.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace hsa {

Eigen::MatrixXd central_difference(const MatrixFunction& f, const Eigen::MatrixXd& at, double step) {
    if (!(step > 0.0)) {
        throw std::invalid_argument("central_difference step must be positive");
    }
    if (!f) {
        throw std::invalid_argument("central_difference requires a callable function");
    }
    Eigen::MatrixXd result(at.rows(), at.cols());
    Eigen::MatrixXd probe = at;
    for (Eigen::Index i = 0; i < at.rows(); ++i) {
        for (Eigen::Index j = 0; j < at.cols(); ++j) {
            probe(i, j) = at(i, j) + step;
            const double forward = f(probe);
            probe(i, j) = at(i, j) - step;
            const double backward = f(probe);
            probe(i, j) = at(i, j);
            if (!std::isfinite(forward) || !std::isfinite(backward)) {
                throw std::runtime_error("central_difference: non-finite function value probing entry (" +
                                         std::to_string(i) + ", " + std::to_string(j) + ")");
            }
            result(i, j) = (forward - backward) / (2.0 * step);
        }
    }
    return result;
}

GradCheckReport compare_gradients(const Eigen::MatrixXd& analytic, const Eigen::MatrixXd& numeric,
                                  double rel_floor, double fd_step) {
    if (analytic.rows() != numeric.rows() || analytic.cols() != numeric.cols()) {
        throw std::invalid_argument("compare_gradients: shape mismatch (" +
                                    std::to_string(analytic.rows()) + "x" +
                                    std::to_string(analytic.cols()) + " vs " +
                                    std::to_string(numeric.rows()) + "x" +
                                    std::to_string(numeric.cols()) + ")");
    }
    GradCheckReport report;
    report.fd_step = fd_step;
    report.n_entries = analytic.size();
    for (Eigen::Index i = 0; i < analytic.rows(); ++i) {
        for (Eigen::Index j = 0; j < analytic.cols(); ++j) {
            const double a = analytic(i, j);
            const double n = numeric(i, j);
            const double abs_err = std::abs(a - n);
            const double rel_err = abs_err / std::max({std::abs(a), std::abs(n), rel_floor});
            if (rel_err > report.max_rel_error) {
                report.max_rel_error = rel_err;
                report.worst_row = i;
                report.worst_col = j;
            }
            if (abs_err > report.max_abs_error) {
                report.max_abs_error = abs_err;
            }
        }
    }
    return report;
}

}  // namespace hsa
