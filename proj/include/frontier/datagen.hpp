#pragma once

#include "frontier/ef_solver.hpp"
#include "frontier/problem.hpp"
#include "frontier/record_io.hpp"

#include <json.hpp>

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace frontier {

struct Range {
    double lo = 0.0;
    double hi = 0.0;
    double width() const { return hi - lo; }
};

/// Sampling domain. Defaults are the standard training domain.
struct DomainSpec {
    Range v_target{0.05, 0.15};
    Range vols{0.0, 2.0};
    Range returns{-1.0, 2.0};
    Range zeta{0.2, 1.0};
    Range x_max{0.01, 1.0};
    Range alpha_min{0.6, 1.0};
    double alpha_max = 1.0;
    std::size_t n_min = 2;
    std::size_t n_max = 12;
    /// Relative frequency of each asset count 2..12 (renormalized over [n_min, n_max]).
    std::vector<double> asset_count_weights{2.517, 2.551, 2.559, 2.603, 6.834, 6.879,
                                            10.346, 10.377, 13.826, 13.850, 27.658};
    std::vector<int> class_counts{0, 1, 2};
    double full_allocation_probability = 0.5;
    /// x_min_i = U[0, f] * x_max_i; 0 keeps every lower bound at zero.
    double x_min_fraction = 0.0;
    double discontinuity_probability = 0.84;
    double discontinuity_eps = 1e-3;  // fraction of the feature range
    int max_resamples = 1000;

    /// Throws std::invalid_argument on degenerate or inconsistent settings.
    void validate() const;
};

nlohmann::ordered_json domain_to_json(const DomainSpec& spec);
DomainSpec domain_from_json(const nlohmann::json& j);

/// Random correlation matrix from a k-factor model, k uniform in [1, n]:
/// B B' + D rescaled to unit diagonal. PSD by construction.
Matrix sample_correlation(std::mt19937_64& rng, std::size_t n);

/// Draws one structurally feasible problem. The asset count and the
/// full/partial flag are drawn once; all other fields are redrawn until the
/// box / total / class polytope is non-empty. `resamples` receives the
/// number of redraws. Throws std::runtime_error after spec.max_resamples.
EfProblem sample_problem(std::mt19937_64& rng, const DomainSpec& spec, int* resamples = nullptr);

struct DiscontinuityOptions {
    double probability = 0.84;
    double return_eps = 3e-3;  // absolute
    double vol_eps = 2e-3;     // absolute
};

/// Absolute eps values from the domain's range fractions.
DiscontinuityOptions discontinuity_options(const DomainSpec& spec);

/// With the configured probability, moves one asset's return (or vol, chosen
/// evenly) to within eps of another asset's, clamped to the feature range.
EfProblem target_discontinuities(EfProblem problem, std::mt19937_64& rng, const DiscontinuityOptions& options,
                                 const DomainSpec& spec);

struct GenerateOptions {
    std::size_t count = 1000;
    std::uint64_t seed = 0;
    std::size_t shard_size = 1000;
    unsigned threads = 1;
    SolverOptions solver;
    bool label = true;
};

struct GeneratedDataset {
    std::vector<DatasetRecord> records;
    nlohmann::ordered_json manifest;
};

/// Sharded generation: shard s draws from an rng seeded by (seed, s) and
/// keeps attempting until it holds its quota of labelled Optimal records.
/// Output is identical for any thread count.
GeneratedDataset generate(const DomainSpec& spec, const GenerateOptions& options);

std::mt19937_64 shard_rng(std::uint64_t seed, std::uint64_t shard);

/// Writes `path` (records) and `path + ".manifest.json"`.
void write_generated(const GeneratedDataset& dataset, const std::string& path);

}  // namespace frontier
