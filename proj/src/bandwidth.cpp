#include "hsa/bandwidth.hpp"

#include <cmath>
#include <iostream>
#include <stdexcept>
#include <string>

namespace hsa {

BandwidthRule bandwidth_rule_from_name(std::string_view name) {
    if (name == "silverman") return BandwidthRule::silverman;
    if (name == "scott") return BandwidthRule::scott;
    throw std::invalid_argument("unknown bandwidth rule '" + std::string(name) +
                                "' (expected 'silverman' or 'scott')");
}

const char* to_string(BandwidthRule rule) {
    return rule == BandwidthRule::silverman ? "silverman" : "scott";
}

double bandwidth_scale_factor(BandwidthRule rule, Eigen::Index p, Eigen::Index n) {
    if (p < 1 || n < 2) {
        throw std::invalid_argument("bandwidth scale factor requires p >= 1 and n >= 2");
    }
    const double pd = static_cast<double>(p);
    const double nd = static_cast<double>(n);
    switch (rule) {
        case BandwidthRule::silverman:
            return std::pow(4.0 / ((pd + 2.0) * nd), 1.0 / (pd + 4.0));
        case BandwidthRule::scott:
            return std::pow(nd, -1.0 / (pd + 4.0));
    }
    throw std::invalid_argument("unknown bandwidth rule");
}

Bandwidth compute_bandwidth(const SampleSet& source, const SampleSet& target,
                            const Eigen::MatrixXd& w, BandwidthRule rule, double variance_floor) {
    if (source.dim() != target.dim() || source.dim() != w.rows()) {
        throw std::invalid_argument("compute_bandwidth: inconsistent dimensions");
    }
    if (!(variance_floor > 0.0)) {
        throw std::invalid_argument("variance floor must be positive");
    }
    const Eigen::Index n = source.size() + target.size();
    if (n < 2) {
        throw std::invalid_argument("compute_bandwidth requires at least two pooled samples");
    }
    const Eigen::Index p = w.cols();

    Eigen::MatrixXd projected(n, p);
    projected.topRows(source.size()) = source.data * w;
    projected.bottomRows(target.size()) = target.data * w;

    const double factor = bandwidth_scale_factor(rule, p, n);

    Eigen::VectorXd variances(p);
    for (Eigen::Index j = 0; j < p; ++j) {
        const auto col = projected.col(j);
        const double mean = col.mean();
        const double var = (col.array() - mean).square().sum() / static_cast<double>(n - 1);
        const double sigma = std::sqrt(var);
        const double scale = col.cwiseAbs().maxCoeff();
        if (scale == 0.0 || sigma < 1e-15 * scale) {
            throw std::runtime_error("zero-variance projected dimension " + std::to_string(j) +
                                     " (sigma = " + std::to_string(sigma) + ")");
        }
        const double h = sigma * factor;
        double h2 = h * h;
        if (h2 < variance_floor) {
            std::cerr << "bandwidth: variance " << h2 << " in projected dimension " << j
                      << " raised to floor " << variance_floor << "\n";
            h2 = variance_floor;
        }
        variances(j) = h2;
    }
    return Bandwidth(variances);
}

Bandwidth compute_bandwidth(const SampleSet& source, const SampleSet& target,
                            const ProjectionMatrix& w, BandwidthRule rule, double variance_floor) {
    return compute_bandwidth(source, target, w.w, rule, variance_floor);
}

}  // namespace hsa
