#pragma once

#include "frontier/problem.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace frontier {

/// Per-asset box plus total-allocation bounds enforced by the greedy
/// rebalancing projection. Class caps and the volatility cone are not.
struct DgarConstraints {
    Vector x_min;
    Vector x_max;
    double alpha_min = 0.0;
    double alpha_max = 1.0;
};

DgarConstraints dgar_constraints(const EfProblem& problem);

/// x'_i = min(max(x_i, x_min_i), x_max_i).
Vector clip_bounds(const Vector& x, const DgarConstraints& c);

/// clamp(sum x', alpha_min, alpha_max).
double target_total(const Vector& clipped, const DgarConstraints& c);

/// Stable argsort of -x: larger allocations first, ties by ascending index.
std::vector<std::size_t> priority_order(const Vector& x);

/// Greedy walk over `order` trimming whatever pushes the running total past
/// alpha_max. Lower bounds of assets not yet visited stay reserved, so each
/// asset keeps at least x_min.
Vector cap_excess(const Vector& clipped, std::span<const std::size_t> order, const DgarConstraints& c);

/// Greedy fill in `order` of the deficit up to `target` when the capped total
/// is below alpha_min. Each asset is raised at most to x_max.
Vector inflate_deficit(const Vector& capped, std::span<const std::size_t> order, double target,
                       const DgarConstraints& c);

/// Full projection: clip -> target total -> priority order -> cap -> inflate.
/// Box bounds always hold on output; the total lands in [alpha_min, alpha_max]
/// whenever sum(x_min) <= alpha_max and sum(x_max) >= alpha_min.
/// Throws std::invalid_argument on NaN input or length mismatch.
Vector dgar(const Vector& x, const DgarConstraints& c);

/// Projection together with its (piecewise constant) Jacobian d out / d x.
/// At ties the active branch chosen by the forward pass is differentiated.
struct DgarTrace {
    Vector output;
    Matrix jacobian;
};

DgarTrace dgar_with_jacobian(const Vector& x, const DgarConstraints& c);

}  // namespace frontier
