/**
 * Core value types: sample sets, orthonormal projections, and kernel
 * bandwidths shared by the density, divergence, and optimizer modules.
 */

#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>

namespace hsa {

enum class DomainTag { source, target };

const char* to_string(DomainTag tag);

/// A set of n d-dimensional samples (rows) from one domain, with optional
/// integer class labels.
struct SampleSet {
    Eigen::MatrixXd data;  // n x d, rows are samples
    std::optional<Eigen::VectorXi> labels;
    DomainTag domain_tag = DomainTag::source;

    SampleSet() = default;
    SampleSet(Eigen::MatrixXd samples, DomainTag tag);
    SampleSet(Eigen::MatrixXd samples, Eigen::VectorXi class_labels, DomainTag tag);

    Eigen::Index size() const { return data.rows(); }
    Eigen::Index dim() const { return data.cols(); }

    /// Throws std::invalid_argument if empty, non-finite, or label length
    /// does not match the number of rows.
    void validate() const;
};

/// A d x p matrix with orthonormal columns. Construction enforces
/// ||W^T W - I||_F <= kOrthoTol.
struct ProjectionMatrix {
    static constexpr double kOrthoTol = 1e-10;

    Eigen::MatrixXd w;  // d x p

    explicit ProjectionMatrix(Eigen::MatrixXd m);

    Eigen::Index dim() const { return w.rows(); }
    Eigen::Index subspace_dim() const { return w.cols(); }

    /// Frobenius norm of W^T W - I.
    double orthonormality_error() const;
};

/// Per-projected-dimension kernel variances (the diagonal of the bandwidth
/// matrix). Entries must be strictly positive and finite.
struct Bandwidth {
    Eigen::VectorXd variances;  // length p

    explicit Bandwidth(Eigen::VectorXd v);

    Eigen::Index dim() const { return variances.size(); }
};

}  // namespace hsa
