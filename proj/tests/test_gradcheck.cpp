#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "hsa/gradcheck.hpp"
#include "test_support.hpp"

using namespace hsa;
using hsa::testing::random_matrix;

TEST_CASE("central difference of a linear function is the all-ones matrix") {
    const auto sum_entries = [](const Eigen::MatrixXd& m) { return m.sum(); };
    const Eigen::MatrixXd at = random_matrix(4, 3, 1);
    const Eigen::MatrixXd numeric = central_difference(sum_entries, at, 1e-6);
    CHECK((numeric - Eigen::MatrixXd::Ones(4, 3)).cwiseAbs().maxCoeff() <= 1e-9);
}

TEST_CASE("central difference of a linear function is exact across step sizes") {
    const auto sum_entries = [](const Eigen::MatrixXd& m) { return m.sum(); };
    const Eigen::MatrixXd at = Eigen::MatrixXd::Zero(5, 2);
    for (double step : {1e-8, 1e-7, 1e-6, 1e-5, 1e-4}) {
        const Eigen::MatrixXd numeric = central_difference(sum_entries, at, step);
        CAPTURE(step);
        CHECK((numeric - Eigen::MatrixXd::Ones(5, 2)).cwiseAbs().maxCoeff() <= 1e-9);
    }
}

TEST_CASE("central difference recovers the squared-norm gradient") {
    const auto sq_norm = [](const Eigen::MatrixXd& m) { return m.squaredNorm(); };
    const Eigen::MatrixXd at = random_matrix(6, 2, 2);
    const Eigen::MatrixXd numeric = central_difference(sq_norm, at, 1e-6);
    CHECK((numeric - 2.0 * at).cwiseAbs().maxCoeff() <= 1e-6);
}

TEST_CASE("central difference names the entry where the function blows up") {
    const auto partial_sqrt = [](const Eigen::MatrixXd& m) { return std::sqrt(m(1, 1)); };
    Eigen::MatrixXd at = Eigen::MatrixXd::Ones(2, 2);
    at(1, 1) = 0.0;  // the backward probe of (1,1) goes negative
    CHECK_THROWS_WITH_AS(central_difference(partial_sqrt, at, 1e-6), doctest::Contains("(1, 1)"),
                         std::runtime_error);
}

TEST_CASE("central difference validates its inputs") {
    const auto f = [](const Eigen::MatrixXd& m) { return m.sum(); };
    CHECK_THROWS_AS(central_difference(f, Eigen::MatrixXd::Zero(2, 2), 0.0), std::invalid_argument);
    CHECK_THROWS_AS(central_difference(MatrixFunction{}, Eigen::MatrixXd::Zero(2, 2), 1e-6),
                    std::invalid_argument);
}

TEST_CASE("comparing identical matrices reports zero error") {
    const Eigen::MatrixXd m = random_matrix(3, 3, 3);
    const GradCheckReport report = compare_gradients(m, m, 1e-8, 1e-6);
    CHECK(report.max_rel_error == 0.0);
    CHECK(report.max_abs_error == 0.0);
    CHECK(report.n_entries == 9);
    CHECK(report.fd_step == 1e-6);
}

TEST_CASE("relative floor keeps near-zero disagreements small") {
    const Eigen::MatrixXd analytic = Eigen::MatrixXd::Zero(3, 2);
    const Eigen::MatrixXd numeric = Eigen::MatrixXd::Constant(3, 2, 1e-12);
    const GradCheckReport report = compare_gradients(analytic, numeric, 1e-8);
    CHECK(report.max_rel_error == doctest::Approx(1e-4).epsilon(1e-12));
    CHECK(report.max_rel_error <= 1e-4);
}

TEST_CASE("a corrupted entry is localized") {
    const Eigen::MatrixXd numeric = random_matrix(4, 3, 4);
    Eigen::MatrixXd analytic = numeric;
    analytic(2, 1) += 1.0;
    const GradCheckReport report = compare_gradients(analytic, numeric, 1e-8);
    CHECK(report.worst_row == 2);
    CHECK(report.worst_col == 1);
    CHECK(report.max_abs_error == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("comparison is symmetric in its arguments") {
    const Eigen::MatrixXd a = random_matrix(5, 2, 5);
    const Eigen::MatrixXd b = a + 1e-7 * random_matrix(5, 2, 6);
    const GradCheckReport forward = compare_gradients(a, b, 1e-8);
    const GradCheckReport backward = compare_gradients(b, a, 1e-8);
    CHECK(forward.max_rel_error == backward.max_rel_error);
    CHECK(forward.max_abs_error == backward.max_abs_error);
    CHECK(forward.worst_row == backward.worst_row);
    CHECK(forward.worst_col == backward.worst_col);
}

TEST_CASE("comparison rejects shape mismatches") {
    CHECK_THROWS_AS(compare_gradients(Eigen::MatrixXd::Zero(2, 2), Eigen::MatrixXd::Zero(3, 2), 1e-8),
                    std::invalid_argument);
}
