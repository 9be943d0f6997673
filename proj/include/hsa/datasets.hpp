/**
 * Data ingestion and evaluation utilities: CSV loading, a deterministic
 * synthetic covariate-shift generator, pooled standardization, and the
 * 1-nearest-neighbor transfer accuracy used to judge adaptation quality.
 */

#pragma once

#include <cstdint>
#include <string>
#include <utility>

#include "hsa/types.hpp"

namespace hsa {

/// Parameters of the synthetic two-class covariate-shift pair. Classes are
/// separated along the informative dimensions in both domains; the target is
/// shifted along every nuisance dimension and rotated in the plane of the
/// first two nuisance dimensions.
struct ShiftSpec {
    Eigen::Index d = 2;
    Eigen::Index n_per_domain = 100;
    Eigen::Index informative_dims = 1;
    double shift_magnitude = 0.0;
    double rotation_angle = 0.0;  // radians
    double class_separation = 1.0;
    std::uint64_t seed = 0;

    void validate() const;
};

struct EvalReport {
    double accuracy_adapted = 0.0;
    double accuracy_unadapted = 0.0;
    double accuracy_pca = 0.0;
    Eigen::Index n_test = 0;
};

/// Loads a rectangular numeric CSV (comma separator, decimal point, LF or
/// CRLF). With has_labels the last column must hold integer class ids.
/// Parse errors cite the 1-based line number.
SampleSet load_csv(const std::string& path, bool has_labels, DomainTag tag,
                   bool skip_header = false);

/// Deterministic synthetic source/target pair drawn from one seeded stream.
std::pair<SampleSet, SampleSet> make_shift_pair(const ShiftSpec& spec);

struct StandardizeResult {
    SampleSet source;
    SampleSet target;
    Eigen::VectorXd mean;   // pooled per-dimension mean
    Eigen::VectorXd scale;  // pooled per-dimension standard deviation
};

/// Subtracts the pooled mean and divides by the pooled standard deviation
/// per dimension. Throws on zero-variance dimensions.
StandardizeResult standardize(const SampleSet& source, const SampleSet& target);

/// 1-nearest-neighbor accuracy on the projected target set, trained on the
/// projected source set. Distance ties resolve to the smaller source row.
double knn_transfer_accuracy(const SampleSet& source, const SampleSet& target,
                             const ProjectionMatrix& w);

}  // namespace hsa
