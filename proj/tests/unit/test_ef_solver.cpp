#include "fixtures.hpp"
#include "frontier/datagen.hpp"
#include "frontier/ef_solver.hpp"
#include "frontier/oracle.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace frontier;
using fixtures::vec;

namespace {

// Weight on asset 0 minimizing the variance of a fully invested two-asset book.
double two_asset_min_variance(double v1, double v2, double rho) {
    return (v2 * v2 - rho * v1 * v2) / (v1 * v1 + v2 * v2 - 2.0 * rho * v1 * v2);
}

// Largest weight on asset 0 whose portfolio volatility equals `target`.
double two_asset_on_target(double v1, double v2, double rho, double target) {
    const double a = v1 * v1 + v2 * v2 - 2.0 * rho * v1 * v2;
    const double b = 2.0 * rho * v1 * v2 - 2.0 * v2 * v2;
    const double c = v2 * v2 - target * target;
    return (-b + std::sqrt(b * b - 4.0 * a * c)) / (2.0 * a);
}

}  // namespace

TEST_CASE("two-asset constraint system without classes") {
    EfProblem p = fixtures::two_asset(0.1, 0.05, 0.2, 0.1, 0.0, 0.1);
    const ConstraintSystem cs = build_constraints(as_canonical(p));
    Matrix a(6, 2);
    a << 1, 0, 0, 1, -1, 0, 0, -1, -1, -1, 1, 1;
    CHECK(cs.A == a);
    CHECK(cs.b == vec({1, 1, 0, 0, -1, 1}));
    CHECK(cs.v_t == doctest::Approx(0.01 * 10000.0));
}

TEST_CASE("constraint system has 2n + 2 + m rows") {
    const ConstraintSystem cs = build_constraints(as_canonical(fixtures::four_asset_two_class()));
    CHECK(cs.A.rows() == 12);
    CHECK(cs.A.cols() == 4);
    CHECK(cs.b.size() == 12);
}

TEST_CASE("points satisfying Ax <= b are exactly the feasible points") {
    DomainSpec spec;
    spec.n_max = 5;
    spec.class_counts = {2};
    std::mt19937_64 rng(43);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 200; ++i) {
        const EfProblem p = sample_problem(rng, spec);
        const CanonicalProblem c = canonicalize(p);
        const ConstraintSystem cs = build_constraints(c);
        const EfProblem& q = c.problem;
        for (int k = 0; k < 50; ++k) {
            Vector x(static_cast<Eigen::Index>(q.size()));
            for (Eigen::Index j = 0; j < x.size(); ++j) {
                x[j] = u(rng) * 0.6;
            }
            bool direct = (x.array() <= q.x_max.array()).all() && (x.array() >= q.x_min.array()).all() &&
                          x.sum() >= q.alpha_min && x.sum() <= q.alpha_max;
            const Vector sums = class_sums(q, x);
            for (Eigen::Index j = 0; j < sums.size(); ++j) {
                direct = direct && sums[j] <= q.zeta_max[j];
            }
            CHECK(direct == ((cs.A * x - cs.b).maxCoeff() <= 0.0));
        }
    }
}

TEST_CASE("identical assets split evenly") {
    const EfProblem p = fixtures::two_asset(0.1, 0.1, 0.2, 0.2, 0.3, 0.01);
    const StageResult r = solve_min_variance(build_constraints(as_canonical(p)));
    REQUIRE(r.status == SolveStatus::Optimal);
    CHECK(r.x[0] == doctest::Approx(0.5).epsilon(1e-7));
    CHECK(r.x[1] == doctest::Approx(0.5).epsilon(1e-7));
}

TEST_CASE("a riskless asset takes all the weight at minimum variance") {
    const EfProblem p = fixtures::two_asset(0.1, 0.05, 0.0, 1.0, 0.0, 0.01);
    const ConstraintSystem cs = build_constraints(as_canonical(p));
    const StageResult r = solve_min_variance(cs);
    REQUIRE(r.status == SolveStatus::Optimal);
    // No strict complementarity at x = (1, 0), so interior-point iterates
    // approach it only like sqrt(mu); the objective is what is accurate.
    CHECK(0.5 * r.x.dot(cs.Q * r.x) <= 1e-5);
    CHECK(r.x[0] == doctest::Approx(1.0).epsilon(1e-4));
    CHECK(std::abs(r.x[1]) <= 1e-4);
}

TEST_CASE("two-asset minimum-variance branch matches the closed form") {
    const EfProblem p = fixtures::two_asset(0.1, 0.05, 0.2, 0.1, 0.3, 0.05);
    const SolverResult r = solve_ef(p);
    REQUIRE(r.status == SolveStatus::Optimal);
    CHECK(r.branch == Branch::MinVariance);
    const double w = two_asset_min_variance(0.2, 0.1, 0.3);
    CHECK(r.allocation.x[0] == doctest::Approx(w).epsilon(1e-6));
    CHECK(r.allocation.x[1] == doctest::Approx(1.0 - w).epsilon(1e-6));
    CHECK(r.kkt_residual <= 1e-6);
}

TEST_CASE("two-asset max-return branch lands on the volatility target") {
    const EfProblem p = fixtures::two_asset(0.1, 0.05, 0.2, 0.1, 0.3, 0.15);
    const SolverResult r = solve_ef(p);
    REQUIRE(r.status == SolveStatus::Optimal);
    CHECK(r.branch == Branch::MaxReturn);
    const double w = two_asset_on_target(0.2, 0.1, 0.3, 0.15);
    CHECK(r.allocation.x[0] == doctest::Approx(w).epsilon(1e-6));
    CHECK(r.allocation.achieved_vol == doctest::Approx(0.15).epsilon(1e-6));
}

TEST_CASE("slack volatility cone gives the greedy linear solution") {
    EfProblem p;
    p.returns = vec({0.1, 0.3, 0.2});
    p.vols = vec({0.01, 0.01, 0.01});
    p.corr = Matrix::Identity(3, 3);
    p.x_min = Vector::Zero(3);
    p.x_max = vec({0.3, 0.5, 0.4});
    p.alpha_min = 0.6;
    p.alpha_max = 1.0;
    p.v_target = 0.15;
    const SolverResult r = solve_ef(p);
    REQUIRE(r.status == SolveStatus::Optimal);
    CHECK(r.branch == Branch::MaxReturn);
    CHECK(r.allocation.x[0] == doctest::Approx(0.1).epsilon(1e-6));
    CHECK(r.allocation.x[1] == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(r.allocation.x[2] == doctest::Approx(0.4).epsilon(1e-6));
}

TEST_CASE("equal returns leave a flat objective") {
    const EfProblem p = fixtures::two_asset(0.1, 0.1, 0.01, 0.01, 0.0, 0.15);
    const SolverResult r = solve_ef(p);
    REQUIRE(r.status == SolveStatus::Optimal);
    CHECK(r.allocation.achieved_return == doctest::Approx(0.1).epsilon(1e-6));
}

TEST_CASE("unreachable total is infeasible") {
    EfProblem p = fixtures::four_asset_two_class();
    p.x_max = vec({0.1, 0.1, 0.1, 0.1});
    const SolverResult r = solve_ef(p);
    CHECK(r.status == SolveStatus::Infeasible);
    std::string why;
    CHECK_FALSE(structurally_feasible(p, &why));
    CHECK_FALSE(why.empty());
}

TEST_CASE("class caps that block the total are infeasible") {
    EfProblem p = fixtures::four_asset_two_class();
    p.zeta_max = vec({0.3, 0.3});
    CHECK(solve_ef(p).status == SolveStatus::Infeasible);
}

TEST_CASE("solve_ef rejects invalid problems") {
    EfProblem p = fixtures::four_asset_two_class();
    p.corr(0, 1) = 2.0;
    CHECK_THROWS_AS(solve_ef(p), std::invalid_argument);
}

TEST_CASE("worked four-asset instance solves to a feasible point") {
    const EfProblem p = fixtures::four_asset_two_class();
    const SolverResult r = solve_ef(p);
    REQUIRE(r.status == SolveStatus::Optimal);
    const Vector& x = r.allocation.x;
    CHECK((x.array() <= p.x_max.array() + 1e-8).all());
    CHECK(x.minCoeff() >= -1e-8);
    CHECK(x.sum() >= 0.81 - 1e-8);
    CHECK(x.sum() <= 1.0 + 1e-8);
    const Vector sums = class_sums(p, x);
    CHECK(sums[0] <= 0.74 + 1e-8);
    CHECK(sums[1] <= 0.58 + 1e-8);
}

TEST_CASE("raising the volatility target never lowers the return") {
    DomainSpec spec;
    spec.n_max = 6;
    std::mt19937_64 rng(47);
    for (int i = 0; i < 200; ++i) {
        EfProblem p = sample_problem(rng, spec);
        double previous = -1e300;
        for (int k = 0; k < 10; ++k) {
            p.v_target = 0.05 + 0.01 * k;
            const SolverResult r = solve_ef(p);
            REQUIRE(r.status == SolveStatus::Optimal);
            CHECK(r.allocation.achieved_return >= previous - 1e-6);
            previous = r.allocation.achieved_return;
        }
    }
}

TEST_CASE("batch solve matches single solves for any thread count") {
    DomainSpec spec;
    std::mt19937_64 rng(53);
    std::vector<EfProblem> problems;
    for (int i = 0; i < 40; ++i) {
        problems.push_back(sample_problem(rng, spec));
    }
    const auto one = solve_batch(problems, {}, 1);
    const auto four = solve_batch(problems, {}, 4);
    REQUIRE(one.size() == problems.size());
    for (std::size_t i = 0; i < problems.size(); ++i) {
        const SolverResult single = solve_ef(problems[i]);
        CHECK(one[i].allocation.x == single.allocation.x);
        CHECK(four[i].allocation.x == single.allocation.x);
    }
}

TEST_CASE("oracle recovers the symmetric split") {
    const EfProblem p = fixtures::two_asset(0.1, 0.1, 0.2, 0.2, 0.3, 0.01);
    const OracleResult o = brute_force_oracle(p, 20000);
    CHECK(o.branch == Branch::MinVariance);
    CHECK(o.allocation.x[0] == doctest::Approx(0.5).epsilon(1e-4));
}

TEST_CASE("oracle never beats the solver on the worked constraint set") {
    std::mt19937_64 rng(59);
    std::uniform_real_distribution<double> ur(-1.0, 2.0), uv(0.0, 2.0), ut(0.05, 0.15);
    for (int trial = 0; trial < 25; ++trial) {
        EfProblem p = fixtures::four_asset_two_class();
        for (Eigen::Index i = 0; i < 4; ++i) {
            p.returns[i] = ur(rng);
            p.vols[i] = uv(rng);
        }
        p.corr = sample_correlation(rng, 4);
        p.v_target = ut(rng);
        const SolverResult r = solve_ef(p);
        REQUIRE(r.status == SolveStatus::Optimal);
        OracleOptions oo;
        oo.samples = 20000;
        oo.seed = static_cast<std::uint64_t>(trial);
        const OracleResult o = brute_force_oracle(p, oo);
        const double solver = ef_objective(p, r.allocation.x, r.branch);
        if (r.branch == Branch::MinVariance) {
            CHECK(o.objective >= solver - 1e-4);
        } else {
            CHECK(o.objective <= solver + 1e-4);
        }
    }
}

TEST_CASE("status and branch names") {
    CHECK(std::string(to_string(SolveStatus::Optimal)) == "optimal");
    CHECK(std::string(to_string(SolveStatus::Infeasible)) == "infeasible");
    CHECK(std::string(to_string(SolveStatus::NumericalFailure)) == "numerical_failure");
    CHECK(std::string(to_string(Branch::MinVariance)) == "min_variance");
    CHECK(std::string(to_string(Branch::MaxReturn)) == "max_return");
}
