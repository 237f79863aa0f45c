#pragma once

#include "frontier/problem.hpp"

#include <cstddef>
#include <vector>

namespace frontier {

/// A rewritten problem in return-sorted asset order.
///
/// `perm[k]` is the original index of the asset at canonical position k.
struct CanonicalProblem {
    EfProblem problem;
    std::vector<std::size_t> perm;
};

/// x_max_i <- min(x_max_i, zeta_{C_i}), then x_min_i <- min(x_min_i, x_max_i).
EfProblem clamp_asset_caps(EfProblem problem);

/// Singleton classes take the cap of their only member; empty classes get 0.
EfProblem normalize_classes(EfProblem problem);

/// Stable sort by non-increasing return (ties keep ascending original index).
CanonicalProblem sort_by_returns(const EfProblem& problem);

/// clamp_asset_caps -> normalize_classes -> sort_by_returns. Idempotent.
CanonicalProblem canonicalize(const EfProblem& problem);

/// Wraps a problem with the identity permutation and no rewriting.
CanonicalProblem as_canonical(EfProblem problem);

Vector to_original_order(const CanonicalProblem& canonical, const Vector& canonical_x);
Vector to_canonical_order(const CanonicalProblem& canonical, const Vector& original_x);

/// Reorders every per-asset field of `problem`; new position k takes old index perm[k].
EfProblem permute_assets(const EfProblem& problem, const std::vector<std::size_t>& perm);

}  // namespace frontier
