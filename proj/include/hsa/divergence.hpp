/**
 * Empirical Hellinger divergence between projected source and target
 * densities, and its analytic gradient with respect to the projection.
 *
 * The contrast T(x) = s(x) / (s(x) + t(x)) compares the two kernel density
 * estimates at x; the per-sample loss is G(T) = 1 - 2*sqrt(T(1-T)), zero
 * where the densities agree and approaching one where they separate. The
 * objective averages G over both sample sets, so it lies in [0, 2].
 *
 * The gradient treats the bandwidth as a constant of differentiation. Two
 * internal assembly routes are provided and must agree: the closed final
 * form built from scatter matrices, and the chain-rule composition through
 * the log-density gradients.
 */

#pragma once

#include "hsa/density.hpp"
#include "hsa/types.hpp"

namespace hsa {

/// Contrast values are clamped to [kContrastClamp, 1 - kContrastClamp] so
/// sqrt(T(1-T)) stays away from zero at saturation.
inline constexpr double kContrastClamp = 1e-12;

struct ContrastValue {
    double t;  // in (0, 1)
};

struct ObjectiveValue {
    double d_hat;  // in [0, 2]
    Eigen::VectorXd per_source_losses;
    Eigen::VectorXd per_target_losses;
};

struct GradientMatrix {
    Eigen::MatrixXd g;  // d x p, all entries finite
};

enum class GradientPath {
    final_form,  // scatter-difference form (C^t - C^s) W H^{-1}
    chain_rule   // composed through the per-density log-density gradients
};

/// T(q) = sigmoid(log s(q) - log t(q)), clamped. Both models must share the
/// same projection and bandwidth.
ContrastValue contrast(const KdeModel& source_model, const KdeModel& target_model,
                       const Eigen::VectorXd& query);

/// Per-sample loss G(T) = 1 - 2*sqrt(T(1-T)); zero at T = 1/2, approaching
/// one at the boundaries.
double hellinger_loss(ContrastValue t);

/// Residual of the identity T(1-T) G'(T) = sqrt(T(1-T)) (2T-1) satisfied by
/// the closed-form loss derivative; a self-test of the loss choice.
double loss_derivative_identity_residual(ContrastValue t);

/// D(W) = mean_i G(T(x_i^source)) + mean_i G(T(x_i^target)) with per-sample
/// losses recorded for diagnostics.
ObjectiveValue objective(const SampleSet& source, const SampleSet& target,
                         const Eigen::MatrixXd& w, const Bandwidth& bw);
ObjectiveValue objective(const SampleSet& source, const SampleSet& target,
                         const ProjectionMatrix& w, const Bandwidth& bw);

/// Analytic gradient of the objective with respect to W, bandwidth frozen.
GradientMatrix gradient(const SampleSet& source, const SampleSet& target,
                        const Eigen::MatrixXd& w, const Bandwidth& bw,
                        GradientPath path = GradientPath::final_form);
GradientMatrix gradient(const SampleSet& source, const SampleSet& target,
                        const ProjectionMatrix& w, const Bandwidth& bw,
                        GradientPath path = GradientPath::final_form);

}  // namespace hsa
