#pragma once

#include "frontier/ef_solver.hpp"
#include "frontier/problem.hpp"

#include <cstddef>
#include <cstdint>

namespace frontier {

struct OracleOptions {
    std::size_t samples = 200000;
    std::uint64_t seed = 0;
    int refinement_sweeps = 200;
    /// Exact candidate search over active constraint sets (skipped above this many assets).
    std::size_t max_enumeration_assets = 6;
    double feasibility_tolerance = 1e-9;
};

struct OracleResult {
    Allocation allocation;
    Branch branch = Branch::MinVariance;
    double objective = 0.0;  // unscaled variance or return, per branch
    double v_min = 0.0;      // smallest unscaled variance found
    std::size_t accepted_samples = 0;
    std::size_t candidates = 0;
};

/// Independent reference for the two-stage frontier program on small problems.
///
/// Works directly from the raw problem (no canonicalization, no interior
/// point): rejection sampling over the feasible set (Dirichlet totals and
/// uniform box draws), local refinement by exact line searches along
/// single-asset and pairwise-transfer directions, and, for up to
/// `max_enumeration_assets` assets, enumeration of stationary points of every
/// independent active constraint set. Every candidate is feasible, so the
/// reported objective is a valid bound on the true optimum.
OracleResult brute_force_oracle(const EfProblem& problem, const OracleOptions& options);
OracleResult brute_force_oracle(const EfProblem& problem, std::size_t samples);

}  // namespace frontier
