#include "fixtures.hpp"
#include "frontier/datagen.hpp"
#include "frontier/dgar.hpp"
#include "frontier/ef_solver.hpp"
#include "frontier/evalkit.hpp"

#include <doctest.h>

#include <algorithm>
#include <random>

using namespace frontier;
using fixtures::vec;

TEST_CASE("weight errors") {
    const Vector t = vec({0.1, 0.2, 0.3, 0.4});
    const WeightErrors zero = weight_errors(t, t);
    CHECK(zero.mse == 0.0);
    CHECK(zero.mae == 0.0);
    CHECK(zero.sum_abs == 0.0);
    const WeightErrors shifted = weight_errors((t.array() + 0.01).matrix(), t);
    CHECK(shifted.sum_abs == doctest::Approx(0.04));
    CHECK(shifted.mae == doctest::Approx(0.01));
    CHECK(shifted.mse == doctest::Approx(1e-4));
    CHECK_THROWS_AS(weight_errors(vec({1}), t), std::invalid_argument);
}

TEST_CASE("weight errors match a naive recomputation") {
    std::mt19937_64 rng(107);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 100; ++i) {
        Vector a(7), b(7);
        for (Eigen::Index k = 0; k < 7; ++k) {
            a[k] = u(rng);
            b[k] = u(rng);
        }
        double sq = 0.0, ab = 0.0;
        for (Eigen::Index k = 0; k < 7; ++k) {
            sq += (a[k] - b[k]) * (a[k] - b[k]);
            ab += std::abs(a[k] - b[k]);
        }
        const WeightErrors e = weight_errors(a, b);
        CHECK(e.mse == doctest::Approx(sq / 7));
        CHECK(e.mae == doctest::Approx(ab / 7));
        CHECK(e.sum_abs == doctest::Approx(ab));
    }
}

TEST_CASE("ranking with tolerance merging") {
    CHECK(same_ranking(vec({0.5, 0.3, 0.2}), vec({0.5, 0.3, 0.2}), 1e-4));
    CHECK_FALSE(same_ranking(vec({0.3, 0.5, 0.2}), vec({0.5, 0.3, 0.2}), 1e-4));
    CHECK(same_ranking(vec({0.5, 0.0, 0.00004}), vec({0.5, 0.00005, 0.0}), 1e-4));
    CHECK(same_ranking(vec({0.40005, 0.4, 0.2}), vec({0.4, 0.40005, 0.2}), 1e-4));

    const std::vector<Vector> preds{vec({0.5, 0.5}), vec({0.2, 0.8})};
    const std::vector<Vector> truths{vec({0.5, 0.5}), vec({0.8, 0.2})};
    CHECK(ranking_precision(preds, truths, 1e-4) == doctest::Approx(50.0));
}

TEST_CASE("constraint precisions") {
    const EfProblem p = fixtures::four_asset_two_class();
    const SolverResult r = solve_ef(p);
    REQUIRE(r.status == SolveStatus::Optimal);
    const ConstraintCheck exact = constraint_precisions(r.allocation.x, p, r.v_min);
    CHECK(exact.zeta_ok);
    CHECK(exact.vol_ok);

    Vector over = r.allocation.x;
    over[0] += 0.74 - class_sums(p, over)[0] + 0.05;
    CHECK_FALSE(constraint_precisions(over, p, r.v_min).zeta_ok);

    const Vector heavy = vec({0.591, 0.149, 0.2, 0.06});
    CHECK_FALSE(constraint_precisions(heavy, p, r.v_min).vol_ok);
}

TEST_CASE("projected random vectors keep box and total but may break class caps") {
    DomainSpec spec;
    spec.class_counts = {2};
    std::mt19937_64 rng(109);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int zeta_broken = 0;
    for (int i = 0; i < 500; ++i) {
        const EfProblem p = sample_problem(rng, spec);
        Vector x(static_cast<Eigen::Index>(p.size()));
        for (Eigen::Index k = 0; k < x.size(); ++k) {
            x[k] = u(rng);
        }
        const Vector y = dgar(x, dgar_constraints(p));
        CHECK((y.array() <= p.x_max.array()).all());
        CHECK(y.sum() >= p.alpha_min - 1e-12);
        CHECK(y.sum() <= p.alpha_max + 1e-12);
        zeta_broken += constraint_precisions(y, p, 0.0).zeta_ok ? 0 : 1;
    }
    CHECK(zeta_broken > 0);
}

TEST_CASE("nearest-rank quantiles") {
    std::vector<double> v{5, 1, 4, 2, 3};
    CHECK(exact_quantile(v, 0.0) == 1);
    CHECK(exact_quantile(v, 0.2) == 1);
    CHECK(exact_quantile(v, 0.21) == 2);
    CHECK(exact_quantile(v, 0.5) == 3);
    CHECK(exact_quantile(v, 1.0) == 5);
    CHECK_THROWS_AS(exact_quantile({}, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(exact_quantile(v, 1.5), std::invalid_argument);
}

TEST_CASE("exact solver is the evaluation fixpoint; uniform baseline is not") {
    DomainSpec spec;
    GenerateOptions g;
    g.count = 200;
    g.seed = 11;
    const GeneratedDataset ds = generate(spec, g);
    const EvalReport exact = evaluate(ds.records, [](const EfProblem& p) { return solve_ef(p).allocation; });
    CHECK(exact.overall.samples == 200);
    CHECK(exact.overall.weight_mae == 0.0);
    CHECK(exact.overall.return_mse == 0.0);
    CHECK(exact.overall.vol_mae == 0.0);
    CHECK(exact.overall.ranking_precision == 100.0);
    CHECK(exact.overall.zeta_precision == 100.0);
    CHECK(exact.overall.vol_precision == 100.0);
    CHECK_FALSE(exact.warnings.empty());  // small buckets

    const EvalReport flat = evaluate(ds.records, [](const EfProblem& p) {
        const Vector x = Vector::Constant(static_cast<Eigen::Index>(p.size()), 1.0 / static_cast<double>(p.size()));
        return make_allocation(p, dgar(x, dgar_constraints(p)));
    });
    CHECK(flat.overall.weight_mae > 0.0);
    for (const auto& b : flat.buckets) {
        CHECK(b.quantiles[0] <= b.quantiles[1]);
        CHECK(b.quantiles[1] <= b.quantiles[2]);
        CHECK(b.ranking_precision >= 0.0);
        CHECK(b.ranking_precision <= 100.0);
    }
    const auto j = report_to_json(flat);
    CHECK(j.contains("buckets"));
    CHECK(j.at("overall").at("samples") == 200);
}

TEST_CASE("parameter paths") {
    EfProblem p = fixtures::four_asset_two_class();
    CHECK(get_param(p, "returns[2]") == 0.05);
    CHECK(get_param(p, "v_target") == 0.1);
    set_param(p, "corr[0][3]", 0.25);
    CHECK(p.corr(0, 3) == 0.25);
    CHECK(p.corr(3, 0) == 0.25);
    set_param(p, "zeta_max[1]", 0.5);
    CHECK(p.zeta_max[1] == 0.5);
    CHECK_THROWS_AS(get_param(p, "returns[9]"), std::invalid_argument);
    CHECK_THROWS_AS(get_param(p, "bogus"), std::invalid_argument);
    CHECK_THROWS_AS(get_param(p, "v_target[0]"), std::invalid_argument);
}

TEST_CASE("sweeping a dominated asset leaves the allocation unchanged") {
    EfProblem p = fixtures::four_asset_two_class();
    p.v_target = 0.5;  // slack cone: the greedy fill decides
    const auto f = [](const EfProblem& q) { return solve_ef(q).allocation; };
    const SweepTable t = sweep(p, "returns[3]", -1.0, -0.5, 6, f);
    REQUIRE(t.rows.size() == 6);
    for (const auto& row : t.rows) {
        CHECK((row.weights - t.rows[0].weights).cwiseAbs().maxCoeff() <= 1e-6);
    }
    CHECK(t.jumps == 0);
}

TEST_CASE("crossing returns of two assets gives one jump") {
    const EfProblem p = fixtures::two_asset(0.1, 0.05, 0.01, 0.01, 0.0, 0.15);
    const auto f = [](const EfProblem& q) { return solve_ef(q).allocation; };
    const SweepTable t = sweep(p, "returns[1]", 0.005, 0.205, 21, f);
    CHECK(t.jumps == 1);
    const std::string csv = sweep_to_csv(t);
    CHECK(csv.rfind("value,w0,w1,return,vol,jump\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 22);
    CHECK_THROWS_AS(sweep(p, "returns[1]", 0.0, 1.0, 1, f), std::invalid_argument);
}
