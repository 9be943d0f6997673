#include "hsa/types.hpp"

#include <stdexcept>
#include <string>
#include <utility>

namespace hsa {

const char* to_string(DomainTag tag) {
    return tag == DomainTag::source ? "source" : "target";
}

SampleSet::SampleSet(Eigen::MatrixXd samples, DomainTag tag)
    : data(std::move(samples)), domain_tag(tag) {
    validate();
}

SampleSet::SampleSet(Eigen::MatrixXd samples, Eigen::VectorXi class_labels, DomainTag tag)
    : data(std::move(samples)), labels(std::move(class_labels)), domain_tag(tag) {
    validate();
}

void SampleSet::validate() const {
    if (data.rows() < 1 || data.cols() < 1) {
        throw std::invalid_argument("SampleSet requires at least one sample and one dimension");
    }
    if (!data.allFinite()) {
        throw std::invalid_argument("SampleSet entries must all be finite");
    }
    if (labels && labels->size() != data.rows()) {
        throw std::invalid_argument("SampleSet labels must have one entry per sample (got " +
                                    std::to_string(labels->size()) + " for " +
                                    std::to_string(data.rows()) + " samples)");
    }
}

ProjectionMatrix::ProjectionMatrix(Eigen::MatrixXd m) : w(std::move(m)) {
    if (w.cols() < 1 || w.cols() > w.rows()) {
        throw std::invalid_argument("ProjectionMatrix requires 1 <= p <= d, got d=" +
                                    std::to_string(w.rows()) + ", p=" + std::to_string(w.cols()));
    }
    if (!w.allFinite()) {
        throw std::invalid_argument("ProjectionMatrix entries must all be finite");
    }
    const double err = orthonormality_error();
    if (!(err <= kOrthoTol)) {
        throw std::invalid_argument("ProjectionMatrix columns are not orthonormal (||W^T W - I||_F = " +
                                    std::to_string(err) + ")");
    }
}

double ProjectionMatrix::orthonormality_error() const {
    const Eigen::Index p = w.cols();
    return (w.transpose() * w - Eigen::MatrixXd::Identity(p, p)).norm();
}

Bandwidth::Bandwidth(Eigen::VectorXd v) : variances(std::move(v)) {
    if (variances.size() < 1) {
        throw std::invalid_argument("Bandwidth requires at least one dimension");
    }
    for (Eigen::Index j = 0; j < variances.size(); ++j) {
        const double h2 = variances(j);
        if (!std::isfinite(h2) || h2 <= 0.0) {
            throw std::invalid_argument("Bandwidth variance in dimension " + std::to_string(j) +
                                        " must be strictly positive and finite, got " +
                                        std::to_string(h2));
        }
    }
}

}  // namespace hsa
