#pragma once

#include "frontier/datagen.hpp"
#include "frontier/encoder.hpp"
#include "frontier/parallel.hpp"
#include "frontier/problem.hpp"

#include <chrono>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace frontier {

struct McResult {
    double estimate = 0.0;
    double std_error = 0.0;  // sample stddev / sqrt(N)
    std::size_t n = 0;
    double elapsed_seconds = 0.0;
};

/// Mean and standard error of g(Z) over N draws Z = sampler(rng), rng seeded
/// with `seed`. Draws are taken in sequence and g runs on up to `threads`
/// threads; the reduction is sequential, so the result does not depend on
/// the thread count.
template <typename Sampler, typename G>
McResult estimate_expectation(Sampler&& sampler, G&& g, std::size_t n, std::uint64_t seed, unsigned threads = 1) {
    if (n < 2) {
        throw std::invalid_argument("estimate_expectation: need N >= 2");
    }
    const auto start = std::chrono::steady_clock::now();
    std::mt19937_64 rng(seed);
    using Draw = decltype(sampler(rng));
    std::vector<Draw> draws;
    draws.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        draws.push_back(sampler(rng));
    }
    std::vector<double> values(n);
    parallel_for(n, threads, [&](std::size_t i) { values[i] = static_cast<double>(g(draws[i])); });

    // Welford.
    double mean = 0.0, m2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double delta = values[i] - mean;
        mean += delta / static_cast<double>(i + 1);
        m2 += delta * (values[i] - mean);
    }
    McResult r;
    r.estimate = mean;
    r.n = n;
    r.std_error = std::sqrt(m2 / static_cast<double>(n - 1)) / std::sqrt(static_cast<double>(n));
    r.elapsed_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return r;
}

enum class Engine { ExactSingle, ExactBatchParallel, Surrogate };

const char* to_string(Engine engine);
Engine engine_from_string(const std::string& s);

struct BenchConfig {
    std::vector<Engine> engines{Engine::ExactSingle, Engine::ExactBatchParallel, Engine::Surrogate};
    std::vector<std::size_t> batch_sizes{64};
    std::vector<unsigned> workers{1};
    double duration_seconds = 10.0;
    double warmup_seconds = 2.0;
    int repeats = 3;
    std::uint64_t seed = 0;
    std::size_t stream_size = 2048;
    DomainSpec domain;
    SolverOptions solver;
    const Model<float>* model = nullptr;  // required for the surrogate engine
    /// Upper bound on the surrogate batch; 0 derives it from available memory.
    std::size_t surrogate_batch_cap = 0;
};

struct BenchRow {
    Engine engine = Engine::ExactSingle;
    std::size_t batch_size = 1;
    unsigned workers = 1;
    double evals_per_second = 0.0;  // median over repeats
    double wall_seconds = 0.0;      // of the median repeat
    std::size_t evaluations = 0;    // of the median repeat
};

struct BenchResult {
    std::vector<BenchRow> rows;
    std::size_t surrogate_batch_cap = 0;
    std::size_t stream_size = 0;
    std::uint64_t seed = 0;
};

/// Seeded problem stream shared by every engine (unlabelled datagen draws).
std::vector<EfProblem> problem_stream(const DomainSpec& domain, std::size_t count, std::uint64_t seed);

/// Bytes of MemAvailable from /proc/meminfo, 0 when unknown.
std::size_t available_memory_bytes();

/// Largest surrogate batch whose activations fit in a quarter of `memory_bytes`.
std::size_t surrogate_batch_limit(const EncoderConfig& config, std::size_t memory_bytes);

/// Fixed-duration steady-state throughput per (engine, batch size, workers)
/// cell: warm-up excluded, median of `repeats`. The exact-single engine
/// ignores batch size and worker count and is measured once.
BenchResult bench(const BenchConfig& config);

/// Columns: engine, batch_size, workers, evals_per_second, wall_seconds, evaluations.
std::string bench_to_csv(const BenchResult& result);

}  // namespace frontier
