#include "hsa/divergence.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "hsa/parallel.hpp"

namespace hsa {

namespace {

double stable_sigmoid(double a) {
    if (a >= 0.0) {
        const double e = std::exp(-a);
        return 1.0 / (1.0 + e);
    }
    const double e = std::exp(a);
    return e / (1.0 + e);
}

double clamp_contrast(double t) {
    return std::clamp(t, kContrastClamp, 1.0 - kContrastClamp);
}

/// sqrt(T(1-T)) (2T-1), the per-sample gradient weight.
double contrast_weight(double t) {
    return std::sqrt(t * (1.0 - t)) * (2.0 * t - 1.0);
}

void check_shared_kernel(const KdeModel& source_model, const KdeModel& target_model) {
    if (source_model.projection.rows() != target_model.projection.rows() ||
        source_model.projection.cols() != target_model.projection.cols() ||
        source_model.projection != target_model.projection) {
        throw std::invalid_argument("contrast requires both models to share one projection");
    }
    if (source_model.bandwidth.variances != target_model.bandwidth.variances) {
        throw std::invalid_argument("contrast requires both models to share one bandwidth");
    }
}

void check_pair_dims(const SampleSet& source, const SampleSet& target,
                     const Eigen::MatrixXd& w, const Bandwidth& bw) {
    if (source.dim() != target.dim()) {
        throw std::invalid_argument("source dimension (" + std::to_string(source.dim()) +
                                    ") does not match target dimension (" +
                                    std::to_string(target.dim()) + ")");
    }
    if (w.rows() != source.dim()) {
        throw std::invalid_argument("projection rows (" + std::to_string(w.rows()) +
                                    ") do not match sample dimension (" +
                                    std::to_string(source.dim()) + ")");
    }
    if (bw.dim() != w.cols()) {
        throw std::invalid_argument("bandwidth length (" + std::to_string(bw.dim()) +
                                    ") does not match projection column count (" +
                                    std::to_string(w.cols()) + ")");
    }
}

double raw_contrast(const KdeModel& source_model, const KdeModel& target_model,
                    const Eigen::VectorXd& query) {
    const double log_s = log_density(source_model, query);
    const double log_t = log_density(target_model, query);
    return clamp_contrast(stable_sigmoid(log_s - log_t));
}

/// Compensated mean over a fixed evaluation order.
double kahan_mean(const Eigen::VectorXd& values) {
    double sum = 0.0;
    double carry = 0.0;
    for (Eigen::Index i = 0; i < values.size(); ++i) {
        const double y = values(i) - carry;
        const double t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
    return sum / static_cast<double>(values.size());
}

}  // namespace

ContrastValue contrast(const KdeModel& source_model, const KdeModel& target_model,
                       const Eigen::VectorXd& query) {
    check_shared_kernel(source_model, target_model);
    return ContrastValue{raw_contrast(source_model, target_model, query)};
}

double hellinger_loss(ContrastValue t) {
    if (!(t.t > 0.0 && t.t < 1.0)) {
        throw std::invalid_argument("contrast value must lie in (0, 1), got " + std::to_string(t.t));
    }
    return 1.0 - 2.0 * std::sqrt(t.t * (1.0 - t.t));
}

double loss_derivative_identity_residual(ContrastValue t) {
    if (!(t.t >= kContrastClamp && t.t <= 1.0 - kContrastClamp)) {
        throw std::invalid_argument("contrast value outside clamped range");
    }
    const double root = std::sqrt(t.t * (1.0 - t.t));
    const double loss_slope = (2.0 * t.t - 1.0) / root;
    return t.t * (1.0 - t.t) * loss_slope - root * (2.0 * t.t - 1.0);
}

ObjectiveValue objective(const SampleSet& source, const SampleSet& target,
                         const Eigen::MatrixXd& w, const Bandwidth& bw) {
    check_pair_dims(source, target, w, bw);
    const KdeModel source_model(source, w, bw);
    const KdeModel target_model(target, w, bw);

    const Eigen::Index n_source = source.size();
    const Eigen::Index n_target = target.size();
    Eigen::VectorXd source_losses(n_source);
    Eigen::VectorXd target_losses(n_target);

    detail::parallel_for(n_source + n_target, [&](Eigen::Index i) {
        if (i < n_source) {
            const Eigen::VectorXd q = source.data.row(i).transpose();
            source_losses(i) = hellinger_loss(ContrastValue{raw_contrast(source_model, target_model, q)});
        } else {
            const Eigen::VectorXd q = target.data.row(i - n_source).transpose();
            target_losses(i - n_source) =
                hellinger_loss(ContrastValue{raw_contrast(source_model, target_model, q)});
        }
    });

    const double d_hat = kahan_mean(source_losses) + kahan_mean(target_losses);
    if (!(d_hat >= 0.0 && d_hat <= 2.0)) {
        throw std::logic_error("objective value " + std::to_string(d_hat) + " outside [0, 2]");
    }
    return ObjectiveValue{d_hat, std::move(source_losses), std::move(target_losses)};
}

ObjectiveValue objective(const SampleSet& source, const SampleSet& target,
                         const ProjectionMatrix& w, const Bandwidth& bw) {
    return objective(source, target, w.w, bw);
}

GradientMatrix gradient(const SampleSet& source, const SampleSet& target,
                        const Eigen::MatrixXd& w, const Bandwidth& bw, GradientPath path) {
    check_pair_dims(source, target, w, bw);
    const KdeModel source_model(source, w, bw);
    const KdeModel target_model(target, w, bw);

    const Eigen::Index n_source = source.size();
    const Eigen::Index n_target = target.size();
    const Eigen::Index n_total = n_source + n_target;
    const double source_scale = 1.0 / static_cast<double>(n_source);
    const double target_scale = 1.0 / static_cast<double>(n_target);

    std::vector<Eigen::MatrixXd> terms(static_cast<std::size_t>(n_total));

    detail::parallel_for(n_total, [&](Eigen::Index i) {
        const bool from_source = i < n_source;
        const Eigen::VectorXd q = from_source ? source.data.row(i).transpose()
                                              : target.data.row(i - n_source).transpose();
        const double scale = from_source ? source_scale : target_scale;
        const double t = raw_contrast(source_model, target_model, q);

        Eigen::MatrixXd term;
        if (path == GradientPath::final_form) {
            const Eigen::MatrixXd scatter_diff =
                scatter_matrix(target_model, q) - scatter_matrix(source_model, q);
            term = scatter_diff * w;
            for (Eigen::Index j = 0; j < term.cols(); ++j) {
                term.col(j) /= bw.variances(j);
            }
            term *= scale * contrast_weight(t);
        } else {
            const Eigen::MatrixXd dlog_diff =
                log_density_gradient(source_model, q) - log_density_gradient(target_model, q);
            const double dloss_dt = (2.0 * t - 1.0) / std::sqrt(t * (1.0 - t));
            term = (scale * dloss_dt * t * (1.0 - t)) * dlog_diff;
        }
        terms[static_cast<std::size_t>(i)] = std::move(term);
    });

    // Compensated entrywise reduction in fixed index order.
    Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(w.rows(), w.cols());
    Eigen::MatrixXd carry = Eigen::MatrixXd::Zero(w.rows(), w.cols());
    for (const Eigen::MatrixXd& term : terms) {
        const Eigen::MatrixXd y = term - carry;
        const Eigen::MatrixXd t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }

    if (!sum.allFinite()) {
        throw std::logic_error("gradient contains non-finite entries");
    }
    return GradientMatrix{std::move(sum)};
}

GradientMatrix gradient(const SampleSet& source, const SampleSet& target,
                        const ProjectionMatrix& w, const Bandwidth& bw, GradientPath path) {
    return gradient(source, target, w.w, bw, path);
}

}  // namespace hsa
