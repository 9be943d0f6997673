#include "hsa/optimizer.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

#include "hsa/divergence.hpp"

namespace hsa {

namespace {

constexpr double kMinLineSearchStep = 1e-14;
constexpr double kRankTolerance = 1e-12;

/// Make the largest-magnitude entry of each column positive (first index
/// wins on magnitude ties).
void fix_column_signs(Eigen::MatrixXd& m) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
        Eigen::Index lead = 0;
        double best = -1.0;
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            const double mag = std::abs(m(i, j));
            if (mag > best) {
                best = mag;
                lead = i;
            }
        }
        if (m(lead, j) < 0.0) m.col(j) = -m.col(j);
    }
}

ProjectionMatrix random_orthonormal(Eigen::Index d, Eigen::Index p, std::uint64_t seed) {
    std::mt19937_64 engine(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::MatrixXd m(d, p);
    for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index j = 0; j < p; ++j) {
            m(i, j) = normal(engine);
        }
    }
    return retract(m);
}

}  // namespace

void FitConfig::validate(Eigen::Index data_dim) const {
    if (subspace_dim < 1 || subspace_dim > data_dim) {
        throw std::invalid_argument("subspace_dim must satisfy 1 <= p <= d, got p=" +
                                    std::to_string(subspace_dim) + ", d=" + std::to_string(data_dim));
    }
    if (max_iters < 0) throw std::invalid_argument("max_iters must be nonnegative");
    if (!(initial_step > 0.0)) throw std::invalid_argument("initial_step must be positive");
    if (!(armijo_c > 0.0 && armijo_c < 1.0)) {
        throw std::invalid_argument("armijo_c must lie in (0, 1)");
    }
    if (!(backtrack_factor > 0.0 && backtrack_factor < 1.0)) {
        throw std::invalid_argument("backtrack_factor must lie in (0, 1)");
    }
    if (!(rel_tol > 0.0)) throw std::invalid_argument("rel_tol must be positive");
    if (!(grad_tol > 0.0)) throw std::invalid_argument("grad_tol must be positive");
    if (refresh_bandwidth_every < 1) {
        throw std::invalid_argument("refresh_bandwidth_every must be at least 1");
    }
    if (!(bandwidth_floor > 0.0)) throw std::invalid_argument("bandwidth_floor must be positive");
}

const char* to_string(ConvergedReason reason) {
    switch (reason) {
        case ConvergedReason::rel_tol: return "rel_tol";
        case ConvergedReason::grad_tol: return "grad_tol";
        case ConvergedReason::max_iters: return "max_iters";
        case ConvergedReason::line_search_failure: return "line_search_failure";
    }
    return "unknown";
}

ProjectionMatrix init_projection(const SampleSet& source, const SampleSet& target,
                                 Eigen::Index p, std::uint64_t seed) {
    if (source.dim() != target.dim()) {
        throw std::invalid_argument("init_projection: source and target dimensions differ");
    }
    const Eigen::Index d = source.dim();
    if (p < 1 || p > d) {
        throw std::invalid_argument("init_projection requires 1 <= p <= d, got p=" +
                                    std::to_string(p) + ", d=" + std::to_string(d));
    }
    const Eigen::Index n = source.size() + target.size();
    if (n < 2) {
        throw std::invalid_argument("init_projection requires at least two pooled samples");
    }

    Eigen::MatrixXd pooled(n, d);
    pooled.topRows(source.size()) = source.data;
    pooled.bottomRows(target.size()) = target.data;

    // Standardize defensively: constant dimensions are centered but not
    // rescaled, so degenerate data falls through to the rank check.
    const Eigen::RowVectorXd mean = pooled.colwise().mean();
    pooled.rowwise() -= mean;
    for (Eigen::Index j = 0; j < d; ++j) {
        const double sd = std::sqrt(pooled.col(j).squaredNorm() / static_cast<double>(n - 1));
        if (sd > 0.0) pooled.col(j) /= sd;
    }

    const Eigen::MatrixXd cov = pooled.transpose() * pooled / static_cast<double>(n - 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    if (solver.info() != Eigen::Success) {
        return random_orthonormal(d, p, seed);
    }

    const Eigen::VectorXd eigenvalues = solver.eigenvalues();  // ascending
    const double lambda_max = eigenvalues(d - 1);
    const double rank_tol = std::max(lambda_max, 0.0) * 1e-10;
    Eigen::Index rank = 0;
    for (Eigen::Index i = 0; i < d; ++i) {
        if (eigenvalues(i) > rank_tol && eigenvalues(i) > 0.0) ++rank;
    }
    if (rank < p) {
        return random_orthonormal(d, p, seed);
    }

    Eigen::MatrixXd w(d, p);
    for (Eigen::Index j = 0; j < p; ++j) {
        w.col(j) = solver.eigenvectors().col(d - 1 - j);  // descending eigenvalue order
    }
    fix_column_signs(w);
    return ProjectionMatrix(std::move(w));
}

ProjectionMatrix retract(const Eigen::MatrixXd& w_candidate) {
    const Eigen::Index d = w_candidate.rows();
    const Eigen::Index p = w_candidate.cols();
    if (p < 1 || p > d) {
        throw std::invalid_argument("retract requires a d x p matrix with 1 <= p <= d");
    }
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(w_candidate);
    Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(d, p);
    const Eigen::MatrixXd r = qr.matrixQR().topRows(p).triangularView<Eigen::Upper>();
    for (Eigen::Index j = 0; j < p; ++j) {
        if (std::abs(r(j, j)) < kRankTolerance) {
            throw std::runtime_error("retract: rank-deficient candidate (|R_" + std::to_string(j) +
                                     std::to_string(j) + "| < 1e-12)");
        }
        if (r(j, j) < 0.0) q.col(j) = -q.col(j);
    }
    return ProjectionMatrix(std::move(q));
}

FitReport fit(const SampleSet& source, const SampleSet& target, const FitConfig& config,
              const FitObserver& observer) {
    source.validate();
    target.validate();
    if (source.dim() != target.dim()) {
        throw std::invalid_argument("fit: source and target dimensions differ");
    }
    config.validate(source.dim());

    Eigen::MatrixXd w = init_projection(source, target, config.subspace_dim, config.seed).w;
    Eigen::VectorXd bandwidth_variances;

    std::vector<double> objective_trace;
    std::vector<double> grad_norm_trace;
    std::vector<double> step_trace;
    ConvergedReason reason = ConvergedReason::max_iters;
    int iterations = 0;
    double previous_objective = 0.0;

    for (int iter = 0;; ++iter) {
        if (iter % config.refresh_bandwidth_every == 0) {
            try {
                bandwidth_variances =
                    compute_bandwidth(source, target, w, config.bandwidth_rule, config.bandwidth_floor)
                        .variances;
            } catch (const std::exception& e) {
                throw std::runtime_error("bandwidth computation failed at iteration " +
                                         std::to_string(iter) + ": " + e.what());
            }
        }
        const Bandwidth bw(bandwidth_variances);

        const double obj = objective(source, target, w, bw).d_hat;
        const Eigen::MatrixXd grad = gradient(source, target, w, bw).g;
        const double grad_norm = grad.norm();

        objective_trace.push_back(obj);
        grad_norm_trace.push_back(grad_norm);
        if (observer) observer(iter, w, obj, grad_norm);

        if (grad_norm < config.grad_tol) {
            reason = ConvergedReason::grad_tol;
            iterations = iter;
            break;
        }
        if (iter > 0 &&
            std::abs(obj - previous_objective) < config.rel_tol * std::max(1.0, std::abs(previous_objective))) {
            reason = ConvergedReason::rel_tol;
            iterations = iter;
            break;
        }
        if (iter == config.max_iters) {
            reason = ConvergedReason::max_iters;
            iterations = iter;
            break;
        }

        // Armijo backtracking along -grad with QR retraction.
        const double grad_norm_sq = grad_norm * grad_norm;
        double step = config.initial_step;
        bool accepted = false;
        Eigen::MatrixXd next_w;
        while (step >= kMinLineSearchStep) {
            bool candidate_ok = true;
            Eigen::MatrixXd candidate;
            try {
                candidate = retract(w - step * grad).w;
            } catch (const std::runtime_error&) {
                candidate_ok = false;  // rank-deficient trial point; shrink
            }
            if (candidate_ok) {
                const double candidate_obj = objective(source, target, candidate, bw).d_hat;
                if (candidate_obj <= obj - config.armijo_c * step * grad_norm_sq) {
                    next_w = std::move(candidate);
                    accepted = true;
                    break;
                }
            }
            step *= config.backtrack_factor;
        }
        if (!accepted) {
            reason = ConvergedReason::line_search_failure;
            iterations = iter;
            break;
        }

        w = std::move(next_w);
        step_trace.push_back(step);
        previous_objective = obj;
    }

    return FitReport{ProjectionMatrix(std::move(w)), std::move(objective_trace),
                     std::move(grad_norm_trace), std::move(step_trace), iterations, reason};
}

}  // namespace hsa
