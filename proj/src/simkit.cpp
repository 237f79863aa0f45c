#include "frontier/simkit.hpp"

#include "frontier/ef_solver.hpp"
#include "frontier/surrogate.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <span>
#include <sstream>

namespace frontier {

namespace {

using Clock = std::chrono::steady_clock;

struct Measurement {
    double seconds = 0.0;
    std::size_t evaluations = 0;
};

// Runs `step` (returning evaluations done) back to back for `duration` seconds.
template <typename Step>
Measurement run_for(double duration, Step&& step) {
    Measurement m;
    const auto start = Clock::now();
    do {
        m.evaluations += step();
        m.seconds = std::chrono::duration<double>(Clock::now() - start).count();
    } while (m.seconds < duration);
    return m;
}

template <typename Step>
BenchRow measure(Engine engine, std::size_t batch, unsigned workers, const BenchConfig& c, Step&& step) {
    if (c.warmup_seconds > 0.0) {
        run_for(c.warmup_seconds, step);
    }
    std::vector<Measurement> runs;
    for (int r = 0; r < std::max(1, c.repeats); ++r) {
        runs.push_back(run_for(c.duration_seconds, step));
    }
    std::sort(runs.begin(), runs.end(), [](const Measurement& a, const Measurement& b) {
        return a.evaluations / a.seconds < b.evaluations / b.seconds;
    });
    const Measurement& mid = runs[runs.size() / 2];
    return {engine, batch, workers, static_cast<double>(mid.evaluations) / mid.seconds, mid.seconds, mid.evaluations};
}

}  // namespace

const char* to_string(Engine engine) {
    switch (engine) {
        case Engine::ExactSingle: return "exact-single";
        case Engine::ExactBatchParallel: return "exact-batch-parallel";
        case Engine::Surrogate: return "surrogate";
    }
    return "unknown";
}

Engine engine_from_string(const std::string& s) {
    for (auto e : {Engine::ExactSingle, Engine::ExactBatchParallel, Engine::Surrogate}) {
        if (s == to_string(e)) {
            return e;
        }
    }
    throw std::invalid_argument("unknown engine '" + s + "'");
}

std::vector<EfProblem> problem_stream(const DomainSpec& domain, std::size_t count, std::uint64_t seed) {
    auto rng = shard_rng(seed, 0);
    const DiscontinuityOptions disc = discontinuity_options(domain);
    std::vector<EfProblem> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        out.push_back(target_discontinuities(sample_problem(rng, domain), rng, disc, domain));
    }
    return out;
}

std::size_t available_memory_bytes() {
    std::ifstream in("/proc/meminfo");
    std::string key;
    std::size_t value = 0;
    std::string unit;
    while (in >> key >> value >> unit) {
        if (key == "MemAvailable:") {
            return value * 1024;
        }
    }
    return 0;
}

std::size_t surrogate_batch_limit(const EncoderConfig& c, std::size_t memory_bytes) {
    // Live activations per sample during one forward pass (float, cached).
    const std::size_t per_layer = c.n_max * (8 * c.token_dim + 3 * c.attention_dim() + 2 * c.ff_dim) +
                                  c.heads * c.n_max * c.n_max;
    const std::size_t per_sample = sizeof(float) * (c.n_max * c.input_dim + c.depth * per_layer + 4 * c.n_max * c.token_dim);
    if (memory_bytes == 0) {
        return 1 << 16;
    }
    return std::max<std::size_t>(1, memory_bytes / 4 / per_sample);
}

BenchResult bench(const BenchConfig& c) {
    if (c.duration_seconds <= 0.0) {
        throw std::invalid_argument("bench: duration must be positive");
    }
    BenchResult result;
    result.seed = c.seed;
    result.stream_size = c.stream_size;
    const std::vector<EfProblem> stream = problem_stream(c.domain, std::max<std::size_t>(1, c.stream_size), c.seed);
    std::size_t cursor = 0;
    auto next_batch = [&](std::size_t size) {
        std::vector<EfProblem> batch;
        batch.reserve(size);
        for (std::size_t i = 0; i < size; ++i) {
            batch.push_back(stream[cursor]);
            cursor = (cursor + 1) % stream.size();
        }
        return batch;
    };

    for (Engine engine : c.engines) {
        if (engine == Engine::ExactSingle) {
            cursor = 0;
            result.rows.push_back(measure(engine, 1, 1, c, [&] {
                const EfProblem& p = stream[cursor];
                cursor = (cursor + 1) % stream.size();
                solve_ef(p, c.solver);
                return std::size_t{1};
            }));
            continue;
        }
        if (engine == Engine::Surrogate && c.model == nullptr) {
            throw std::invalid_argument("bench: surrogate engine needs a model");
        }
        std::size_t cap = std::numeric_limits<std::size_t>::max();
        if (engine == Engine::Surrogate) {
            cap = c.surrogate_batch_cap ? c.surrogate_batch_cap
                                        : surrogate_batch_limit(c.model->config, available_memory_bytes());
            result.surrogate_batch_cap = cap;
        }
        for (std::size_t requested : c.batch_sizes) {
            const std::size_t batch = std::max<std::size_t>(1, std::min(requested, cap));
            for (unsigned workers : c.workers) {
                cursor = 0;
                if (engine == Engine::ExactBatchParallel) {
                    result.rows.push_back(measure(engine, batch, workers, c, [&] {
                        const auto problems = next_batch(batch);
                        solve_batch(problems, c.solver, workers);
                        return batch;
                    }));
                } else {
                    result.rows.push_back(measure(engine, batch, workers, c, [&] {
                        const auto problems = next_batch(batch);
                        predict_batch(std::span<const EfProblem>(problems), *c.model, {}, workers);
                        return batch;
                    }));
                }
            }
        }
    }
    return result;
}

std::string bench_to_csv(const BenchResult& r) {
    std::ostringstream out;
    out << "engine,batch_size,workers,evals_per_second,wall_seconds,evaluations\n";
    for (const auto& row : r.rows) {
        out << to_string(row.engine) << ',' << row.batch_size << ',' << row.workers << ',' << row.evals_per_second
            << ',' << row.wall_seconds << ',' << row.evaluations << '\n';
    }
    return out.str();
}

}  // namespace frontier
