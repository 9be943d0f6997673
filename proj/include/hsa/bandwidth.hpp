/**
 * Diagonal kernel bandwidth derived from pooled projected samples. One
 * bandwidth is shared by the source and target density estimates, computed
 * per projected dimension from the pooled standard deviation and a
 * sample-size-dependent scale factor.
 */

#pragma once

#include <string_view>

#include "hsa/types.hpp"

namespace hsa {

enum class BandwidthRule {
    silverman,  // h = sigma * (4 / ((p + 2) n))^(1 / (p + 4))
    scott       // h = sigma * n^(-1 / (p + 4))
};

BandwidthRule bandwidth_rule_from_name(std::string_view name);
const char* to_string(BandwidthRule rule);

/// The multiplier applied to the per-dimension standard deviation; strictly
/// decreasing in n for fixed p.
double bandwidth_scale_factor(BandwidthRule rule, Eigen::Index p, Eigen::Index n);

inline constexpr double kDefaultVarianceFloor = 1e-12;

/// Per projected dimension j: variance h_j^2 with h_j = sigma_j * factor,
/// sigma_j the pooled sample standard deviation of the projected source and
/// target samples. Throws on zero-variance dimensions; variances below the
/// floor are raised to it with a warning on stderr.
Bandwidth compute_bandwidth(const SampleSet& source, const SampleSet& target,
                            const Eigen::MatrixXd& w,
                            BandwidthRule rule = BandwidthRule::silverman,
                            double variance_floor = kDefaultVarianceFloor);
Bandwidth compute_bandwidth(const SampleSet& source, const SampleSet& target,
                            const ProjectionMatrix& w,
                            BandwidthRule rule = BandwidthRule::silverman,
                            double variance_floor = kDefaultVarianceFloor);

}  // namespace hsa
