#include "fixtures.hpp"
#include "frontier/ipm.hpp"

#include <doctest.h>

#include <random>

using namespace frontier;
using fixtures::vec;

namespace {

Matrix mat(Eigen::Index rows, Eigen::Index cols, std::initializer_list<double> v) {
    Matrix m(rows, cols);
    Eigen::Index k = 0;
    for (double x : v) {
        m(k / cols, k % cols) = x;
        ++k;
    }
    return m;
}

}  // namespace

TEST_CASE("one-dimensional QP with an active bound") {
    const IpmResult r = solve_qp({mat(1, 1, {1}), vec({-1}), mat(1, 1, {1}), vec({0.5})});
    REQUIRE(r.status == IpmStatus::Optimal);
    CHECK(r.x[0] == doctest::Approx(0.5).epsilon(1e-8));
    CHECK(r.lambda[0] == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("inactive bound leaves the unconstrained minimizer") {
    const IpmResult r = solve_qp({mat(1, 1, {1}), vec({-0.3}), mat(1, 1, {1}), vec({0.5})});
    REQUIRE(r.status == IpmStatus::Optimal);
    CHECK(r.x[0] == doctest::Approx(0.3).epsilon(1e-8));
    CHECK(std::abs(r.lambda[0]) <= 1e-7);
}

TEST_CASE("opposite row pair acts as an equality") {
    const Matrix a = mat(2, 2, {1, 1, -1, -1});
    const IpmResult r = solve_qp({Matrix::Identity(2, 2), Vector::Zero(2), a, vec({1, -1})});
    REQUIRE(r.status == IpmStatus::Optimal);
    CHECK(r.x[0] == doctest::Approx(0.5).epsilon(1e-8));
    CHECK(r.x[1] == doctest::Approx(0.5).epsilon(1e-8));
    // Stationarity x + A'lambda = 0 puts the multiplier on the lower-bound row.
    CHECK(r.lambda[0] == doctest::Approx(0.0));
    CHECK(r.lambda[1] == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("contradictory bounds are infeasible") {
    const IpmResult r = solve_qp({mat(1, 1, {1}), vec({0}), mat(2, 1, {1, -1}), vec({0, -1})});
    CHECK(r.status == IpmStatus::Infeasible);
}

TEST_CASE("zero Hessian solves a linear program") {
    const Matrix a = mat(5, 2, {1, 0, 0, 1, -1, 0, 0, -1, 1, 1});
    const IpmResult r = solve_qp({Matrix::Zero(2, 2), vec({-1, -2}), a, vec({1, 1, 0, 0, 1.5})});
    REQUIRE(r.status == IpmStatus::Optimal);
    CHECK(r.x[0] == doctest::Approx(0.5).epsilon(1e-7));
    CHECK(r.x[1] == doctest::Approx(1.0).epsilon(1e-7));
}

TEST_CASE("random QPs satisfy their KKT conditions") {
    std::mt19937_64 rng(41);
    std::normal_distribution<double> nd;
    for (int trial = 0; trial < 200; ++trial) {
        const Eigen::Index n = 2 + trial % 5;
        const Eigen::Index w = n + 3;
        Matrix f(n, n);
        for (Eigen::Index i = 0; i < f.size(); ++i) {
            f.data()[i] = nd(rng);
        }
        QpProblem qp;
        qp.H = f * f.transpose();
        qp.c = Vector(n);
        qp.A = Matrix(w, n);
        for (Eigen::Index i = 0; i < n; ++i) {
            qp.c[i] = nd(rng);
        }
        for (Eigen::Index i = 0; i < qp.A.size(); ++i) {
            qp.A.data()[i] = nd(rng);
        }
        // A strictly feasible point at the origin plus a box keeps the problem bounded.
        qp.b = Vector::Constant(w, 1.0);
        Matrix box(2 * n, n);
        box << Matrix::Identity(n, n), -Matrix::Identity(n, n);
        Matrix a_full(w + 2 * n, n);
        a_full << qp.A, box;
        Vector b_full(w + 2 * n);
        b_full << qp.b, Vector::Constant(2 * n, 3.0);
        qp.A = a_full;
        qp.b = b_full;

        const IpmResult r = solve_qp(qp);
        REQUIRE(r.status == IpmStatus::Optimal);
        const double scale = std::max(qp.H.cwiseAbs().maxCoeff(), qp.c.cwiseAbs().maxCoeff());
        const Vector stationarity = qp.H * r.x + qp.c + qp.A.transpose() * r.lambda;
        CHECK(stationarity.cwiseAbs().maxCoeff() <= 1e-6 * scale);
        CHECK((qp.A * r.x - qp.b).maxCoeff() <= 1e-8);
        CHECK(r.lambda.minCoeff() >= 0.0);
        const Vector slack = qp.b - qp.A * r.x;
        CHECK(slack.cwiseProduct(r.lambda).cwiseAbs().maxCoeff() <= 1e-6 * scale);
    }
}

TEST_CASE("status names") {
    CHECK(std::string(to_string(IpmStatus::Optimal)) == "optimal");
    CHECK(std::string(to_string(IpmStatus::Infeasible)) == "infeasible");
    CHECK(std::string(to_string(IpmStatus::IterationLimit)) == "iteration_limit");
    CHECK(std::string(to_string(IpmStatus::NumericalFailure)) == "numerical_failure");
}
