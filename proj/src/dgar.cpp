#include "frontier/dgar.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace frontier {

namespace {

// Stages fire only when the total misses its bound by more than rounding, so
// a feasible vector passes through bit-for-bit.
double total_tolerance(std::size_t n, double bound) {
    return 16.0 * std::numeric_limits<double>::epsilon() * static_cast<double>(n + 1) * std::max(1.0, std::abs(bound));
}

double ordered_sum(const Vector& x, std::span<const std::size_t> order) {
    double s = 0.0;
    for (std::size_t k : order) {
        s += x[static_cast<Eigen::Index>(k)];
    }
    return s;
}

void check_lengths(const Vector& x, const DgarConstraints& c) {
    if (x.size() != c.x_min.size() || x.size() != c.x_max.size()) {
        throw std::invalid_argument("dgar: vector and bound lengths differ");
    }
}

}  // namespace

DgarConstraints dgar_constraints(const EfProblem& problem) {
    return {problem.x_min, problem.x_max, problem.alpha_min, problem.alpha_max};
}

Vector clip_bounds(const Vector& x, const DgarConstraints& c) {
    check_lengths(x, c);
    return x.cwiseMax(c.x_min).cwiseMin(c.x_max);
}

double target_total(const Vector& clipped, const DgarConstraints& c) {
    return std::min(std::max(clipped.sum(), c.alpha_min), c.alpha_max);
}

std::vector<std::size_t> priority_order(const Vector& x) {
    std::vector<std::size_t> order(static_cast<std::size_t>(x.size()));
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return x[static_cast<Eigen::Index>(a)] > x[static_cast<Eigen::Index>(b)];
    });
    return order;
}

Vector cap_excess(const Vector& clipped, std::span<const std::size_t> order, const DgarConstraints& c) {
    if (ordered_sum(clipped, order) <= c.alpha_max + total_tolerance(order.size(), c.alpha_max)) {
        return clipped;
    }
    const double budget = c.alpha_max - c.x_min.sum();
    Vector out = clipped;
    double running = 0.0;
    for (std::size_t k : order) {
        const auto i = static_cast<Eigen::Index>(k);
        const double excess = clipped[i] - c.x_min[i];
        const double room = std::max(0.0, budget - running);
        const double kept = std::min(excess, room);
        // Untrimmed and saturated assets are written exactly, never through
        // a rounded round trip.
        out[i] = kept >= excess ? clipped[i] : std::min(c.x_min[i] + kept, clipped[i]);
        running += kept;
    }
    return out;
}

Vector inflate_deficit(const Vector& capped, std::span<const std::size_t> order, double target,
                       const DgarConstraints& c) {
    const double total = ordered_sum(capped, order);
    if (total >= c.alpha_min - total_tolerance(order.size(), c.alpha_min)) {
        return capped;
    }
    const double deficit = std::abs(target - total);
    Vector out = capped;
    double cumulative = 0.0;
    for (std::size_t k : order) {
        const auto i = static_cast<Eigen::Index>(k);
        const double headroom = std::min(c.x_max[i] - capped[i], deficit);
        cumulative += headroom;
        const double gap = c.x_max[i] - capped[i];
        const double add = std::max(0.0, headroom - std::max(0.0, -(deficit - cumulative)));
        out[i] = add >= gap ? c.x_max[i] : std::min(c.x_max[i], capped[i] + add);
    }
    return out;
}

Vector dgar(const Vector& x, const DgarConstraints& c) {
    check_lengths(x, c);
    if (x.hasNaN()) {
        throw std::invalid_argument("dgar: NaN in input");
    }
    const Vector clipped = clip_bounds(x, c);
    const double target = target_total(clipped, c);
    const auto order = priority_order(x);
    return inflate_deficit(cap_excess(clipped, order, c), order, target, c);
}

DgarTrace dgar_with_jacobian(const Vector& x, const DgarConstraints& c) {
    check_lengths(x, c);
    if (x.hasNaN()) {
        throw std::invalid_argument("dgar: NaN in input");
    }
    const Eigen::Index n = x.size();
    const Vector clipped = clip_bounds(x, c);
    const double target = target_total(clipped, c);
    const auto order = priority_order(x);
    const Vector capped = cap_excess(clipped, order, c);

    Matrix j_clip = Matrix::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (x[i] >= c.x_min[i] && x[i] <= c.x_max[i]) {
            j_clip(i, i) = 1.0;
        }
    }

    Matrix j_cap = Matrix::Identity(n, n);
    if (ordered_sum(clipped, order) > c.alpha_max + total_tolerance(order.size(), c.alpha_max)) {
        j_cap.setZero();
        const double budget = c.alpha_max - c.x_min.sum();
        double running = 0.0;
        std::vector<Eigen::Index> kept_so_far;
        for (std::size_t k : order) {
            const auto i = static_cast<Eigen::Index>(k);
            const double excess = clipped[i] - c.x_min[i];
            const double room = std::max(0.0, budget - running);
            if (excess <= room) {
                j_cap(i, i) = 1.0;
                kept_so_far.push_back(i);
                running += excess;
            } else {
                if (room > 0.0) {
                    for (Eigen::Index prev : kept_so_far) {
                        j_cap(i, prev) = -1.0;
                    }
                }
                running += room;
                kept_so_far.clear();
            }
        }
    }

    Matrix j_fill = Matrix::Identity(n, n);
    const double total = ordered_sum(capped, order);
    if (total < c.alpha_min - total_tolerance(order.size(), c.alpha_min)) {
        const double deficit = std::abs(target - total);
        double cumulative = 0.0;
        bool crossed = false;
        for (std::size_t pos = 0; pos < order.size(); ++pos) {
            const auto i = static_cast<Eigen::Index>(order[pos]);
            if (crossed) {
                continue;
            }
            const double room_before = deficit - cumulative;
            const double gap = c.x_max[i] - capped[i];
            cumulative += std::min(gap, deficit);
            if (gap < room_before) {
                j_fill(i, i) = 0.0;  // raised to x_max
            } else {
                // Absorbs the remaining deficit: alpha_min minus everything else.
                j_fill(i, i) = 0.0;
                for (std::size_t later = pos + 1; later < order.size(); ++later) {
                    j_fill(i, static_cast<Eigen::Index>(order[later])) = -1.0;
                }
                crossed = true;
            }
        }
    }

    DgarTrace trace;
    trace.output = inflate_deficit(capped, order, target, c);
    trace.jacobian = j_fill * j_cap * j_clip;
    return trace;
}

}  // namespace frontier
