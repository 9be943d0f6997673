#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "hsa/datasets.hpp"
#include "hsa/divergence.hpp"
#include "hsa/optimizer.hpp"
#include "test_support.hpp"

using namespace hsa;
using hsa::testing::random_matrix;
using hsa::testing::random_pair;

TEST_CASE("init projection with p = d returns a full orthogonal basis") {
    auto [source, target] = random_pair(1, 4, 20, 20, 1.0);
    const ProjectionMatrix w = init_projection(source, target, 4, 0);
    CHECK(w.orthonormality_error() <= 1e-10);
}

TEST_CASE("init projection recovers a coordinate axis from axis-aligned data") {
    Eigen::MatrixXd source_samples = Eigen::MatrixXd::Zero(10, 3);
    Eigen::MatrixXd target_samples = Eigen::MatrixXd::Zero(10, 3);
    for (Eigen::Index i = 0; i < 10; ++i) {
        source_samples(i, 0) = static_cast<double>(i);
        target_samples(i, 0) = -static_cast<double>(i) - 0.5;
    }
    const SampleSet source(source_samples, DomainTag::source);
    const SampleSet target(target_samples, DomainTag::target);
    const ProjectionMatrix w = init_projection(source, target, 1, 0);
    CHECK(std::abs(w.w(0, 0) - 1.0) <= 1e-12);
    CHECK(std::abs(w.w(1, 0)) <= 1e-12);
    CHECK(std::abs(w.w(2, 0)) <= 1e-12);
}

TEST_CASE("init projection falls back to a seeded random basis on rank-deficient data") {
    const Eigen::MatrixXd constant = Eigen::MatrixXd::Constant(6, 3, 2.5);
    const SampleSet source(constant, DomainTag::source);
    const SampleSet target(constant, DomainTag::target);

    const ProjectionMatrix first = init_projection(source, target, 2, 7);
    const ProjectionMatrix second = init_projection(source, target, 2, 7);
    CHECK(first.w == second.w);  // bit-identical across calls
    CHECK(first.orthonormality_error() <= 1e-12);

    const ProjectionMatrix other_seed = init_projection(source, target, 2, 8);
    CHECK(first.w != other_seed.w);
}

TEST_CASE("init projection validates p") {
    auto [source, target] = random_pair(2, 3, 5, 5);
    CHECK_THROWS_AS(init_projection(source, target, 4, 0), std::invalid_argument);
    CHECK_THROWS_AS(init_projection(source, target, 0, 0), std::invalid_argument);
}

TEST_CASE("retraction returns an orthonormal input unchanged") {
    const ProjectionMatrix w = hsa::testing::random_projection(6, 2, 3);
    const ProjectionMatrix again = retract(w.w);
    CHECK((again.w - w.w).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("retraction produces orthonormal columns from a random matrix") {
    const Eigen::MatrixXd m = random_matrix(6, 2, 4);
    const ProjectionMatrix q = retract(m);
    CHECK(q.orthonormality_error() <= 1e-12);
    // the retracted basis spans the input columns: residual of projecting m is zero
    const Eigen::MatrixXd residual = m - q.w * (q.w.transpose() * m);
    CHECK(residual.cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("retraction rejects rank-deficient candidates") {
    Eigen::MatrixXd m = random_matrix(6, 2, 5);
    m.col(1) = 2.0 * m.col(0);
    CHECK_THROWS_AS(retract(m), std::runtime_error);
}

TEST_CASE("retraction resolves column signs deterministically") {
    const Eigen::MatrixXd m = random_matrix(5, 2, 6);
    Eigen::MatrixXd negated = m;
    negated.col(0) = -negated.col(0);
    const ProjectionMatrix q = retract(m);
    const ProjectionMatrix q_negated = retract(negated);
    CHECK((q_negated.w.col(0) + q.w.col(0)).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((q_negated.w.col(1) - q.w.col(1)).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("fit on coincident domains converges immediately") {
    const Eigen::MatrixXd samples = random_matrix(20, 3, 7);
    const SampleSet source(samples, DomainTag::source);
    const SampleSet target(samples, DomainTag::target);
    FitConfig config;
    config.subspace_dim = 2;
    config.seed = 5;

    const FitReport report = fit(source, target, config);
    CHECK(report.converged_reason == ConvergedReason::grad_tol);
    CHECK(report.iterations_used == 0);
    REQUIRE(report.objective_trace.size() == 1);
    CHECK(report.objective_trace[0] == 0.0);
    CHECK(report.grad_norm_trace[0] == 0.0);
    CHECK(report.step_trace.empty());
    // zero gradient leaves the initialization untouched
    CHECK(report.final_w.w == init_projection(source, target, 2, 5).w);
}

TEST_CASE("fit is deterministic for a fixed seed") {
    auto [source, target] = random_pair(8, 3, 25, 25, 2.0);
    FitConfig config;
    config.subspace_dim = 1;
    config.max_iters = 10;
    config.seed = 9;

    const FitReport a = fit(source, target, config);
    const FitReport b = fit(source, target, config);
    CHECK(a.final_w.w == b.final_w.w);
    CHECK(a.objective_trace == b.objective_trace);
    CHECK(a.grad_norm_trace == b.grad_norm_trace);
    CHECK(a.step_trace == b.step_trace);
    CHECK(a.iterations_used == b.iterations_used);
    CHECK(a.converged_reason == b.converged_reason);
}

TEST_CASE("fit keeps iterates on the manifold and descends within bandwidth segments") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        auto [source, target] = random_pair(900 + seed, 4, 20, 20, 2.5);
        FitConfig config;
        config.subspace_dim = 1 + static_cast<Eigen::Index>(seed % 2);
        config.max_iters = 15;
        config.seed = seed;
        config.refresh_bandwidth_every = (seed % 3 == 0) ? 1 : 4;

        double max_ortho_error = 0.0;
        const FitReport report = fit(source, target, config,
                                     [&](int, const Eigen::MatrixXd& w, double, double) {
                                         const Eigen::Index p = w.cols();
                                         const double err =
                                             (w.transpose() * w - Eigen::MatrixXd::Identity(p, p)).norm();
                                         max_ortho_error = std::max(max_ortho_error, err);
                                     });
        CAPTURE(seed);
        CHECK(max_ortho_error <= 1e-10);
        for (std::size_t it = 1; it < report.objective_trace.size(); ++it) {
            if (it % static_cast<std::size_t>(config.refresh_bandwidth_every) == 0) continue;
            CHECK(report.objective_trace[it] <= report.objective_trace[it - 1] + 1e-12);
        }
    }
}

TEST_CASE("fit stops at max_iters when allowed no steps") {
    auto [source, target] = random_pair(10, 3, 15, 15, 2.0);
    FitConfig config;
    config.subspace_dim = 1;
    config.max_iters = 0;
    const FitReport report = fit(source, target, config);
    CHECK(report.converged_reason == ConvergedReason::max_iters);
    CHECK(report.iterations_used == 0);
}

TEST_CASE("fit reduces the objective on a shifted synthetic pair") {
    ShiftSpec spec;
    spec.d = 2;
    spec.n_per_domain = 100;
    spec.informative_dims = 1;
    spec.shift_magnitude = 6.0;
    spec.class_separation = 4.0;
    spec.seed = 42;
    auto [source, target] = make_shift_pair(spec);

    FitConfig config;
    config.subspace_dim = 1;
    config.max_iters = 100;
    config.seed = 42;

    const FitReport report = fit(source, target, config);
    REQUIRE(report.objective_trace.size() >= 2);
    const double initial = report.objective_trace.front();
    const double final_value = report.objective_trace.back();
    MESSAGE("initial ", initial, " final ", final_value);
    CHECK(final_value < 0.9 * initial);

    // regression anchors recorded from this seeded instance
    CHECK(std::abs(initial - 0.90919882438223643) <= 1e-9);
    CHECK(std::abs(final_value - 0.0058624675966574046) <= 1e-9);
    CHECK(report.iterations_used == 8);
    CHECK(report.converged_reason == ConvergedReason::rel_tol);
}

TEST_CASE("fit config validation") {
    auto [source, target] = random_pair(11, 3, 10, 10);
    FitConfig config;
    config.subspace_dim = 5;
    CHECK_THROWS_AS(fit(source, target, config), std::invalid_argument);
    config.subspace_dim = 1;
    config.armijo_c = 1.5;
    CHECK_THROWS_AS(fit(source, target, config), std::invalid_argument);
    config.armijo_c = 1e-4;
    config.backtrack_factor = 0.0;
    CHECK_THROWS_AS(fit(source, target, config), std::invalid_argument);
    config.backtrack_factor = 0.5;
    config.refresh_bandwidth_every = 0;
    CHECK_THROWS_AS(fit(source, target, config), std::invalid_argument);
}
