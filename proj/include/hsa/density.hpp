/**
 * Gaussian kernel density estimation of linearly projected samples.
 *
 * A KdeModel binds a sample set to a projection W and a diagonal bandwidth
 * H. The estimated density at x is the average of Gaussian kernels
 *
 *   (2*pi)^(-p/2) |H|^(-1/2) exp(-(x - x_i)^T W H^{-1} W^T (x - x_i) / 2)
 *
 * over the samples x_i. Alongside the log-density this module provides its
 * analytic gradient with respect to W (bandwidth held fixed), built from the
 * softmax kernel weights and their weighted outer-product scatter.
 */

#pragma once

#include <optional>

#include "hsa/types.hpp"

namespace hsa {

struct KdeModel {
    SampleSet samples;
    Eigen::MatrixXd projection;  // d x p; orthonormality is not required here
    Bandwidth bandwidth;         // p variances
    Eigen::MatrixXd projected;   // cached samples.data * projection, n x p

    KdeModel(SampleSet sample_set, const ProjectionMatrix& w, Bandwidth bw);

    /// Off-manifold construction, used by finite-difference probes that
    /// perturb W entrywise.
    KdeModel(SampleSet sample_set, Eigen::MatrixXd w, Bandwidth bw);

    Eigen::Index size() const { return samples.size(); }
    Eigen::Index dim() const { return samples.dim(); }
    Eigen::Index subspace_dim() const { return projection.cols(); }
};

/// Single kernel term exp(-(q - x_i)^T W H^{-1} W^T (q - x_i) / 2), in (0,1].
double kernel_value(const KdeModel& model, const Eigen::VectorXd& query, Eigen::Index sample_index);

/// Normalized kernel weights of all samples at the query point. Nonnegative,
/// summing to one; computed with max-subtraction so distant samples underflow
/// harmlessly. `exclude` drops one sample (leave-one-out evaluation).
Eigen::VectorXd softmax_weights(const KdeModel& model, const Eigen::VectorXd& query,
                                std::optional<Eigen::Index> exclude = std::nullopt);

/// Log of the kernel density estimate at the query point, with the full
/// multivariate normalization constant, computed via log-sum-exp.
double log_density(const KdeModel& model, const Eigen::VectorXd& query,
                   std::optional<Eigen::Index> exclude = std::nullopt);

/// Softmax-weighted scatter of sample differences,
///   C(q) = sum_i a_i (q - x_i)(q - x_i)^T,
/// a symmetric positive-semidefinite d x d matrix.
Eigen::MatrixXd scatter_matrix(const KdeModel& model, const Eigen::VectorXd& query,
                               std::optional<Eigen::Index> exclude = std::nullopt);

/// Gradient of log_density with respect to the projection, bandwidth held
/// fixed: -C(q) W H^{-1}, a d x p matrix.
Eigen::MatrixXd log_density_gradient(const KdeModel& model, const Eigen::VectorXd& query,
                                     std::optional<Eigen::Index> exclude = std::nullopt);

}  // namespace hsa
