#include "fixtures.hpp"
#include "frontier/dgar.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

using namespace frontier;
using fixtures::vec;

namespace {

DgarConstraints unit_box(Eigen::Index n, double alpha_min, double alpha_max) {
    return {Vector::Zero(n), Vector::Ones(n), alpha_min, alpha_max};
}

}  // namespace

TEST_CASE("clip_bounds") {
    const DgarConstraints c = unit_box(2, 0.0, 1.0);
    CHECK(clip_bounds(vec({1.3, -0.1}), c) == vec({1.0, 0.0}));
    CHECK(clip_bounds(vec({0.3, 0.6}), c) == vec({0.3, 0.6}));
}

TEST_CASE("target_total clamps the sum") {
    const DgarConstraints c = unit_box(2, 0.6, 1.0);
    CHECK(target_total(vec({0.1, 0.2}), c) == doctest::Approx(0.6));
    CHECK(target_total(vec({0.3, 0.5}), c) == doctest::Approx(0.8));
    CHECK(target_total(vec({0.7, 0.7}), c) == doctest::Approx(1.0));
}

TEST_CASE("priority_order is a stable descending argsort") {
    CHECK(priority_order(vec({0.2, 0.5, 0.5})) == std::vector<std::size_t>{1, 2, 0});
    CHECK(priority_order(vec({0.9, 0.4, 0.1})) == std::vector<std::size_t>{0, 1, 2});
}

TEST_CASE("cap_excess trims in priority order") {
    const DgarConstraints c2 = unit_box(2, 0.0, 1.0);
    const auto o2 = priority_order(vec({0.9, 0.8}));
    const Vector a = cap_excess(vec({0.9, 0.8}), o2, c2);
    CHECK(a[0] == 0.9);
    CHECK(a[1] == doctest::Approx(0.1).epsilon(1e-15));
    CHECK(cap_excess(vec({0.3, 0.2}), o2, c2) == vec({0.3, 0.2}));

    const DgarConstraints c3 = unit_box(3, 0.0, 1.0);
    const Vector x3 = vec({0.6, 0.6, 0.6});
    const Vector b = cap_excess(x3, priority_order(x3), c3);
    CHECK(b[0] == 0.6);
    CHECK(b[1] == doctest::Approx(0.4).epsilon(1e-15));
    CHECK(b[2] == 0.0);
}

TEST_CASE("cap_excess keeps lower bounds of later assets") {
    DgarConstraints c{vec({0.0, 0.0, 0.2}), Vector::Ones(3), 0.0, 1.0};
    const Vector x = vec({0.7, 0.6, 0.3});
    const Vector out = cap_excess(x, priority_order(x), c);
    CHECK(out[2] >= 0.2);
    CHECK(out.sum() == doctest::Approx(1.0));
}

TEST_CASE("inflate_deficit fills in priority order") {
    DgarConstraints c{Vector::Zero(2), vec({0.5, 0.5}), 0.6, 1.0};
    const Vector x = vec({0.2, 0.1});
    const Vector out = inflate_deficit(x, priority_order(x), target_total(x, c), c);
    CHECK(out[0] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(out[1] == 0.1);
    CHECK(out.sum() == doctest::Approx(0.6));

    const Vector enough = vec({0.4, 0.3});
    CHECK(inflate_deficit(enough, priority_order(enough), target_total(enough, c), c) == enough);
}

TEST_CASE("unreachable alpha_min saturates at x_max") {
    DgarConstraints c{Vector::Zero(2), vec({0.2, 0.3}), 0.8, 1.0};
    const Vector out = dgar(vec({0.1, 0.1}), c);
    CHECK(out[0] == doctest::Approx(0.2));
    CHECK(out[1] == doctest::Approx(0.3));
    CHECK(out.sum() < c.alpha_min);
}

TEST_CASE("feasible vectors pass through unchanged") {
    DgarConstraints c{Vector::Zero(3), vec({0.5, 0.5, 0.5}), 0.6, 1.0};
    const Vector x = vec({0.3, 0.25, 0.2});
    CHECK(dgar(x, c) == x);
}

TEST_CASE("two-asset grid maps into the feasible region") {
    DgarConstraints c{Vector::Zero(2), vec({0.7, 0.8}), 0.6, 1.0};
    for (int i = -10; i <= 30; ++i) {
        for (int j = -10; j <= 30; ++j) {
            const Vector out = dgar(vec({0.05 * i, 0.05 * j}), c);
            CHECK(out[0] >= 0.0);
            CHECK(out[0] <= 0.7);
            CHECK(out[1] >= 0.0);
            CHECK(out[1] <= 0.8);
            CHECK(out.sum() >= 0.6 - 1e-12);
            CHECK(out.sum() <= 1.0 + 1e-12);
        }
    }
}

TEST_CASE("trimming respects priority among three assets") {
    DgarConstraints c = unit_box(3, 0.0, 1.0);
    const Vector x = vec({0.5, 0.7, 0.6});
    const Vector out = dgar(x, c);
    // Highest first: 0.7 kept, then 0.3 left for the 0.6 asset, nothing for 0.5.
    CHECK(out[1] == 0.7);
    CHECK(out[2] == doctest::Approx(0.3).epsilon(1e-15));
    CHECK(out[0] == 0.0);
}

TEST_CASE("dgar rejects NaN and mismatched lengths") {
    const DgarConstraints c = unit_box(2, 0.0, 1.0);
    CHECK_THROWS_AS(dgar(vec({std::numeric_limits<double>::quiet_NaN(), 0.1}), c), std::invalid_argument);
    CHECK_THROWS_AS(dgar(vec({0.1, 0.2, 0.3}), c), std::invalid_argument);
}

TEST_CASE("Jacobian matches finite differences away from kinks") {
    std::mt19937_64 rng(61);
    std::uniform_real_distribution<double> u(-0.2, 0.9);
    int compared = 0;
    for (int trial = 0; trial < 500; ++trial) {
        const Eigen::Index n = 2 + trial % 5;
        DgarConstraints c{Vector::Zero(n), Vector::Constant(n, 0.6), 0.7, 1.0};
        Vector x(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            x[i] = u(rng);
        }
        const DgarTrace t = dgar_with_jacobian(x, c);
        CHECK(t.output == dgar(x, c));
        const double h = 1e-7;
        Matrix fd(n, n);
        bool smooth = true;
        for (Eigen::Index j = 0; j < n; ++j) {
            Vector xp = x, xm = x;
            xp[j] += h;
            xm[j] -= h;
            const Vector dp = dgar(xp, c), dm = dgar(xm, c);
            fd.col(j) = (dp - dm) / (2 * h);
            // Rejects points where a branch switches inside the stencil.
            const Vector one_sided = (dp - t.output) / h;
            smooth = smooth && (one_sided - fd.col(j)).cwiseAbs().maxCoeff() < 1e-5;
        }
        if (smooth) {
            ++compared;
            CHECK((fd - t.jacobian).cwiseAbs().maxCoeff() <= 1e-5);
        }
    }
    CHECK(compared > 300);
}

TEST_CASE("hand-traced Jacobian for a deficit fill") {
    DgarConstraints c{Vector::Zero(2), vec({0.5, 0.5}), 0.6, 1.0};
    const DgarTrace t = dgar_with_jacobian(vec({0.2, 0.1}), c);
    Matrix expected(2, 2);
    expected << 0, -1, 0, 1;
    CHECK(t.jacobian == expected);
}
