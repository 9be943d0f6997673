#include "hsa/density.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>

namespace hsa {

namespace {

void check_model_dims(const SampleSet& samples, const Eigen::MatrixXd& w, const Bandwidth& bw) {
    if (samples.dim() != w.rows()) {
        throw std::invalid_argument("projection rows (" + std::to_string(w.rows()) +
                                    ") do not match sample dimension (" +
                                    std::to_string(samples.dim()) + ")");
    }
    if (bw.dim() != w.cols()) {
        throw std::invalid_argument("bandwidth length (" + std::to_string(bw.dim()) +
                                    ") does not match projection column count (" +
                                    std::to_string(w.cols()) + ")");
    }
    if (w.cols() < 1) {
        throw std::invalid_argument("projection must have at least one column");
    }
}

void check_query(const KdeModel& model, const Eigen::VectorXd& query) {
    if (query.size() != model.dim()) {
        throw std::invalid_argument("query dimension (" + std::to_string(query.size()) +
                                    ") does not match sample dimension (" +
                                    std::to_string(model.dim()) + ")");
    }
    if (!query.allFinite()) {
        throw std::invalid_argument("query must be finite");
    }
}

std::optional<Eigen::Index> check_exclusion(const KdeModel& model,
                                            std::optional<Eigen::Index> exclude) {
    if (!exclude) return exclude;
    if (*exclude < 0 || *exclude >= model.size()) {
        throw std::invalid_argument("leave-one-out index " + std::to_string(*exclude) +
                                    " out of range for " + std::to_string(model.size()) +
                                    " samples");
    }
    if (model.size() < 2) {
        throw std::invalid_argument("leave-one-out evaluation requires at least two samples");
    }
    return exclude;
}

/// Kernel log-weights -0.5 * sum_j (z_j - z_ij)^2 / h2_j for all samples.
Eigen::VectorXd kernel_exponents(const KdeModel& model, const Eigen::VectorXd& query) {
    const Eigen::RowVectorXd z = (model.projection.transpose() * query).transpose();
    Eigen::ArrayXXd diff = (model.projected.rowwise() - z).array().square();
    for (Eigen::Index j = 0; j < diff.cols(); ++j) {
        diff.col(j) /= model.bandwidth.variances(j);
    }
    return (-0.5 * diff.rowwise().sum()).matrix();
}

}  // namespace

KdeModel::KdeModel(SampleSet sample_set, const ProjectionMatrix& w, Bandwidth bw)
    : KdeModel(std::move(sample_set), w.w, std::move(bw)) {}

KdeModel::KdeModel(SampleSet sample_set, Eigen::MatrixXd w, Bandwidth bw)
    : samples(std::move(sample_set)), projection(std::move(w)), bandwidth(std::move(bw)) {
    samples.validate();
    check_model_dims(samples, projection, bandwidth);
    projected = samples.data * projection;
}

double kernel_value(const KdeModel& model, const Eigen::VectorXd& query, Eigen::Index sample_index) {
    check_query(model, query);
    if (sample_index < 0 || sample_index >= model.size()) {
        throw std::invalid_argument("sample index " + std::to_string(sample_index) +
                                    " out of range for " + std::to_string(model.size()) +
                                    " samples");
    }
    const Eigen::VectorXd z = model.projection.transpose() * query;
    const Eigen::ArrayXd dz = (z.transpose() - model.projected.row(sample_index)).transpose().array();
    const double quad = (dz.square() / model.bandwidth.variances.array()).sum();
    return std::exp(-0.5 * quad);
}

Eigen::VectorXd softmax_weights(const KdeModel& model, const Eigen::VectorXd& query,
                                std::optional<Eigen::Index> exclude) {
    check_query(model, query);
    exclude = check_exclusion(model, exclude);

    Eigen::VectorXd exponents = kernel_exponents(model, query);
    if (exclude) exponents(*exclude) = -std::numeric_limits<double>::infinity();

    const double shift = exponents.maxCoeff();
    Eigen::VectorXd weights = (exponents.array() - shift).exp().matrix();
    if (exclude) weights(*exclude) = 0.0;
    weights /= weights.sum();
    return weights;
}

double log_density(const KdeModel& model, const Eigen::VectorXd& query,
                   std::optional<Eigen::Index> exclude) {
    check_query(model, query);
    exclude = check_exclusion(model, exclude);

    Eigen::VectorXd exponents = kernel_exponents(model, query);
    if (exclude) exponents(*exclude) = -std::numeric_limits<double>::infinity();

    const double shift = exponents.maxCoeff();
    double sum = 0.0;
    for (Eigen::Index i = 0; i < exponents.size(); ++i) {
        if (exclude && i == *exclude) continue;
        sum += std::exp(exponents(i) - shift);
    }
    const double n_terms = static_cast<double>(model.size() - (exclude ? 1 : 0));

    const Eigen::Index p = model.subspace_dim();
    const double log_norm = -0.5 * (static_cast<double>(p) * std::log(2.0 * std::numbers::pi) +
                                    model.bandwidth.variances.array().log().sum());
    return log_norm + shift + std::log(sum) - std::log(n_terms);
}

Eigen::MatrixXd scatter_matrix(const KdeModel& model, const Eigen::VectorXd& query,
                               std::optional<Eigen::Index> exclude) {
    const Eigen::VectorXd weights = softmax_weights(model, query, exclude);
    const Eigen::Index d = model.dim();
    Eigen::MatrixXd scatter = Eigen::MatrixXd::Zero(d, d);
    for (Eigen::Index i = 0; i < model.size(); ++i) {
        const double a = weights(i);
        if (a == 0.0) continue;
        const Eigen::VectorXd delta = query - model.samples.data.row(i).transpose();
        // materialize the outer product so the weight scales entries of an
        // exactly symmetric matrix
        const Eigen::MatrixXd outer = delta * delta.transpose();
        scatter.noalias() += a * outer;
    }
    return scatter;
}

Eigen::MatrixXd log_density_gradient(const KdeModel& model, const Eigen::VectorXd& query,
                                     std::optional<Eigen::Index> exclude) {
    Eigen::MatrixXd grad = -(scatter_matrix(model, query, exclude) * model.projection);
    for (Eigen::Index j = 0; j < grad.cols(); ++j) {
        grad.col(j) /= model.bandwidth.variances(j);
    }
    return grad;
}

}  // namespace hsa
