/**
 * Projection fitting: steepest descent on the empirical Hellinger objective
 * over matrices with orthonormal columns, using Armijo backtracking and a
 * thin-QR retraction. The bandwidth is recomputed on a configurable cadence
 * and held fixed within each line search so the analytic gradient matches
 * the searched objective.
 */

#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "hsa/bandwidth.hpp"
#include "hsa/types.hpp"

namespace hsa {

struct FitConfig {
    Eigen::Index subspace_dim = 1;
    int max_iters = 200;
    double initial_step = 1.0;
    double armijo_c = 1e-4;
    double backtrack_factor = 0.5;
    double rel_tol = 1e-9;
    double grad_tol = 1e-6;
    std::uint64_t seed = 0;
    int refresh_bandwidth_every = 1;
    BandwidthRule bandwidth_rule = BandwidthRule::silverman;
    double bandwidth_floor = kDefaultVarianceFloor;

    void validate(Eigen::Index data_dim) const;
};

enum class ConvergedReason { rel_tol, grad_tol, max_iters, line_search_failure };

const char* to_string(ConvergedReason reason);

struct FitReport {
    ProjectionMatrix final_w;
    std::vector<double> objective_trace;   // one entry per visited iterate
    std::vector<double> grad_norm_trace;   // Frobenius norms, same length
    std::vector<double> step_trace;        // accepted step sizes, one per completed iteration
    int iterations_used = 0;               // number of accepted steps
    ConvergedReason converged_reason = ConvergedReason::max_iters;
};

/// Per-iteration hook, called after the objective and gradient are evaluated
/// at the current iterate.
using FitObserver =
    std::function<void(int iteration, const Eigen::MatrixXd& w, double objective, double grad_norm)>;

/// Top-p principal directions of the standardized pooled samples, with the
/// largest-magnitude entry of each column made positive. Falls back to a
/// seeded random orthonormal matrix when the pooled covariance has rank
/// below p.
ProjectionMatrix init_projection(const SampleSet& source, const SampleSet& target,
                                 Eigen::Index p, std::uint64_t seed);

/// Q factor of the thin QR decomposition with diag(R) > 0. Throws when a
/// diagonal entry of R falls below 1e-12 (rank-deficient candidate).
ProjectionMatrix retract(const Eigen::MatrixXd& w_candidate);

FitReport fit(const SampleSet& source, const SampleSet& target, const FitConfig& config,
              const FitObserver& observer = {});

}  // namespace hsa
