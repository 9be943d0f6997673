/**
 * Finite-difference verification for gradients of scalar functions of a
 * d x p matrix. The central-difference probe is independent of any analytic
 * gradient path and serves as its oracle.
 */

#pragma once

#include <Eigen/Dense>

#include <functional>

namespace hsa {

struct GradCheckReport {
    double max_rel_error = 0.0;
    double max_abs_error = 0.0;
    Eigen::Index worst_row = 0;
    Eigen::Index worst_col = 0;
    double fd_step = 0.0;
    Eigen::Index n_entries = 0;
};

using MatrixFunction = std::function<double(const Eigen::MatrixXd&)>;

inline constexpr double kDefaultFdStep = 1e-6;
inline constexpr double kDefaultRelFloor = 1e-8;

/// Entrywise central difference (f(A + h E_ij) - f(A - h E_ij)) / (2h).
/// Throws if f returns a non-finite value at any probe, naming the entry.
Eigen::MatrixXd central_difference(const MatrixFunction& f, const Eigen::MatrixXd& at,
                                   double step = kDefaultFdStep);

/// Entrywise relative error |a - n| / max(|a|, |n|, rel_floor), reporting the
/// maxima and the worst entry. Symmetric in the two matrices.
GradCheckReport compare_gradients(const Eigen::MatrixXd& analytic, const Eigen::MatrixXd& numeric,
                                  double rel_floor = kDefaultRelFloor, double fd_step = 0.0);

}  // namespace hsa
