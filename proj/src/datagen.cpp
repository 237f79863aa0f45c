#include "frontier/datagen.hpp"

#include "frontier/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace frontier {

namespace {

double uniform(std::mt19937_64& rng, const Range& r) {
    if (r.hi == r.lo) {
        return r.lo;
    }
    return std::uniform_real_distribution<double>(r.lo, r.hi)(rng);
}

nlohmann::ordered_json range_json(const Range& r) { return nlohmann::ordered_json::array({r.lo, r.hi}); }

Range range_from(const nlohmann::json& j, const char* name, Range fallback) {
    if (!j.contains(name)) {
        return fallback;
    }
    const auto& a = j.at(name);
    return {a.at(0).get<double>(), a.at(1).get<double>()};
}

void check_range(const Range& r, const char* name) {
    if (!(r.lo <= r.hi) || !std::isfinite(r.lo) || !std::isfinite(r.hi)) {
        throw std::invalid_argument(std::string("domain: bad range for ") + name);
    }
}

}  // namespace

void DomainSpec::validate() const {
    check_range(v_target, "v_target");
    check_range(vols, "vols");
    check_range(returns, "returns");
    check_range(zeta, "zeta");
    check_range(x_max, "x_max");
    check_range(alpha_min, "alpha_min");
    if (vols.lo < 0.0 || v_target.lo < 0.0) {
        throw std::invalid_argument("domain: volatilities must be non-negative");
    }
    if (x_max.lo < 0.0 || x_max.hi > 1.0) {
        throw std::invalid_argument("domain: x_max range must lie in [0, 1]");
    }
    if (alpha_min.hi > alpha_max) {
        throw std::invalid_argument("domain: alpha_min range exceeds alpha_max");
    }
    if (n_min < 2 || n_min > n_max || n_max > 1 + asset_count_weights.size()) {
        throw std::invalid_argument("domain: asset count range outside the weight table");
    }
    double total = 0.0;
    for (std::size_t n = n_min; n <= n_max; ++n) {
        total += asset_count_weights[n - 2];
    }
    if (!(total > 0.0)) {
        throw std::invalid_argument("domain: asset count weights sum to zero");
    }
    if (class_counts.empty()) {
        throw std::invalid_argument("domain: no class counts");
    }
    for (int c : class_counts) {
        if (c < 0 || c > 3) {
            throw std::invalid_argument("domain: class counts must lie in [0, 3]");
        }
    }
    if (full_allocation_probability < 0.0 || full_allocation_probability > 1.0 || x_min_fraction < 0.0 ||
        x_min_fraction > 1.0 || discontinuity_probability < 0.0 || discontinuity_probability > 1.0 ||
        discontinuity_eps < 0.0 || max_resamples < 1) {
        throw std::invalid_argument("domain: probability or fraction out of range");
    }
}

nlohmann::ordered_json domain_to_json(const DomainSpec& s) {
    nlohmann::ordered_json j;
    j["v_target"] = range_json(s.v_target);
    j["vols"] = range_json(s.vols);
    j["returns"] = range_json(s.returns);
    j["zeta"] = range_json(s.zeta);
    j["x_max"] = range_json(s.x_max);
    j["alpha_min"] = range_json(s.alpha_min);
    j["alpha_max"] = s.alpha_max;
    j["n_min"] = s.n_min;
    j["n_max"] = s.n_max;
    j["asset_count_weights"] = s.asset_count_weights;
    j["class_counts"] = s.class_counts;
    j["full_allocation_probability"] = s.full_allocation_probability;
    j["x_min_fraction"] = s.x_min_fraction;
    j["discontinuity_probability"] = s.discontinuity_probability;
    j["discontinuity_eps"] = s.discontinuity_eps;
    j["max_resamples"] = s.max_resamples;
    return j;
}

DomainSpec domain_from_json(const nlohmann::json& j) {
    DomainSpec s;
    s.v_target = range_from(j, "v_target", s.v_target);
    s.vols = range_from(j, "vols", s.vols);
    s.returns = range_from(j, "returns", s.returns);
    s.zeta = range_from(j, "zeta", s.zeta);
    s.x_max = range_from(j, "x_max", s.x_max);
    s.alpha_min = range_from(j, "alpha_min", s.alpha_min);
    s.alpha_max = j.value("alpha_max", s.alpha_max);
    s.n_min = j.value("n_min", s.n_min);
    s.n_max = j.value("n_max", s.n_max);
    s.asset_count_weights = j.value("asset_count_weights", s.asset_count_weights);
    s.class_counts = j.value("class_counts", s.class_counts);
    s.full_allocation_probability = j.value("full_allocation_probability", s.full_allocation_probability);
    s.x_min_fraction = j.value("x_min_fraction", s.x_min_fraction);
    s.discontinuity_probability = j.value("discontinuity_probability", s.discontinuity_probability);
    s.discontinuity_eps = j.value("discontinuity_eps", s.discontinuity_eps);
    s.max_resamples = j.value("max_resamples", s.max_resamples);
    s.validate();
    return s;
}

Matrix sample_correlation(std::mt19937_64& rng, std::size_t n) {
    const auto dim = static_cast<Eigen::Index>(n);
    const auto k = static_cast<Eigen::Index>(std::uniform_int_distribution<std::size_t>(1, n)(rng));
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> idio(0.05, 1.0);
    Matrix b(dim, k);
    for (Eigen::Index i = 0; i < dim; ++i) {
        for (Eigen::Index f = 0; f < k; ++f) {
            b(i, f) = normal(rng);
        }
    }
    Matrix c = b * b.transpose();
    for (Eigen::Index i = 0; i < dim; ++i) {
        c(i, i) += idio(rng);
    }
    const Vector d = c.diagonal().cwiseSqrt().cwiseInverse();
    Matrix corr = d.asDiagonal() * c * d.asDiagonal();
    corr = (0.5 * (corr + corr.transpose())).eval().cwiseMax(-1.0).cwiseMin(1.0);
    corr.diagonal().setOnes();
    return corr;
}

EfProblem sample_problem(std::mt19937_64& rng, const DomainSpec& spec, int* resamples) {
    std::vector<double> weights(spec.asset_count_weights.begin() + static_cast<std::ptrdiff_t>(spec.n_min - 2),
                                spec.asset_count_weights.begin() + static_cast<std::ptrdiff_t>(spec.n_max - 1));
    std::discrete_distribution<std::size_t> count_dist(weights.begin(), weights.end());
    const std::size_t n = spec.n_min + count_dist(rng);
    const bool full = std::bernoulli_distribution(spec.full_allocation_probability)(rng);
    const auto dim = static_cast<Eigen::Index>(n);

    for (int attempt = 0; attempt < spec.max_resamples; ++attempt) {
        EfProblem p;
        p.returns.resize(dim);
        p.vols.resize(dim);
        p.x_max.resize(dim);
        p.x_min = Vector::Zero(dim);
        for (Eigen::Index i = 0; i < dim; ++i) {
            p.returns[i] = uniform(rng, spec.returns);
            p.vols[i] = uniform(rng, spec.vols);
            p.x_max[i] = uniform(rng, spec.x_max);
            if (spec.x_min_fraction > 0.0) {
                p.x_min[i] = uniform(rng, {0.0, spec.x_min_fraction}) * p.x_max[i];
            }
        }
        p.corr = sample_correlation(rng, n);
        const int classes = spec.class_counts[std::uniform_int_distribution<std::size_t>(
            0, spec.class_counts.size() - 1)(rng)];
        if (classes > 0) {
            p.zeta_max.resize(classes);
            for (int c = 0; c < classes; ++c) {
                p.zeta_max[c] = uniform(rng, spec.zeta);
            }
            std::uniform_int_distribution<int> pick(0, classes - 1);
            p.classes.resize(n);
            for (auto& c : p.classes) {
                c = pick(rng);
            }
        }
        if (full) {
            p.alpha_min = p.alpha_max = spec.alpha_max;
        } else {
            p.alpha_max = spec.alpha_max;
            p.alpha_min = spec.alpha_min.lo == spec.alpha_min.hi
                              ? spec.alpha_min.lo
                              : std::uniform_real_distribution<double>(spec.alpha_min.lo, spec.alpha_min.hi)(rng);
        }
        p.v_target = uniform(rng, spec.v_target);
        if (structurally_feasible(p)) {
            if (resamples) {
                *resamples = attempt;
            }
            return p;
        }
    }
    throw std::runtime_error("sample_problem: no feasible draw after " + std::to_string(spec.max_resamples) +
                             " attempts");
}

DiscontinuityOptions discontinuity_options(const DomainSpec& spec) {
    return {spec.discontinuity_probability, spec.discontinuity_eps * spec.returns.width(),
            spec.discontinuity_eps * spec.vols.width()};
}

EfProblem target_discontinuities(EfProblem p, std::mt19937_64& rng, const DiscontinuityOptions& o,
                                 const DomainSpec& spec) {
    const std::size_t n = p.size();
    if (n < 2 || !std::bernoulli_distribution(o.probability)(rng)) {
        return p;
    }
    const auto i = static_cast<Eigen::Index>(std::uniform_int_distribution<std::size_t>(0, n - 1)(rng));
    auto j = static_cast<Eigen::Index>(std::uniform_int_distribution<std::size_t>(0, n - 2)(rng));
    if (j >= i) {
        ++j;
    }
    const bool on_returns = std::bernoulli_distribution(0.5)(rng);
    Vector& field = on_returns ? p.returns : p.vols;
    const Range& range = on_returns ? spec.returns : spec.vols;
    const double eps = on_returns ? o.return_eps : o.vol_eps;
    const double offset = eps > 0.0 ? std::uniform_real_distribution<double>(-eps, eps)(rng) : 0.0;
    field[j] = std::clamp(field[i] + offset, range.lo, range.hi);
    return p;
}

std::mt19937_64 shard_rng(std::uint64_t seed, std::uint64_t shard) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(shard), static_cast<std::uint32_t>(shard >> 32)};
    return std::mt19937_64(seq);
}

namespace {

struct ShardOutput {
    std::vector<DatasetRecord> records;
    std::size_t attempts = 0;
    std::size_t infeasible = 0;
    std::size_t numerical_failure = 0;
    std::size_t invalid = 0;
    std::size_t resamples = 0;
};

ShardOutput run_shard(const DomainSpec& spec, const GenerateOptions& o, std::size_t shard, std::size_t quota) {
    ShardOutput out;
    auto rng = shard_rng(o.seed, shard);
    const DiscontinuityOptions disc = discontinuity_options(spec);
    const std::size_t max_attempts = 100 * quota + 100;
    while (out.records.size() < quota) {
        if (++out.attempts > max_attempts) {
            throw std::runtime_error("generate: shard " + std::to_string(shard) + " dropped too many samples");
        }
        int resamples = 0;
        EfProblem p = sample_problem(rng, spec, &resamples);
        out.resamples += static_cast<std::size_t>(resamples);
        p = target_discontinuities(std::move(p), rng, disc, spec);
        DatasetRecord rec{std::move(p), std::nullopt};
        if (o.label) {
            SolverResult r;
            try {
                r = solve_ef(rec.problem, o.solver);
            } catch (const std::invalid_argument&) {
                ++out.invalid;
                continue;
            }
            if (r.status == SolveStatus::Infeasible) {
                ++out.infeasible;
                continue;
            }
            if (r.status != SolveStatus::Optimal) {
                ++out.numerical_failure;
                continue;
            }
            rec.label = make_label(r);
        }
        out.records.push_back(std::move(rec));
    }
    return out;
}

}  // namespace

GeneratedDataset generate(const DomainSpec& spec, const GenerateOptions& o) {
    spec.validate();
    if (o.shard_size == 0) {
        throw std::invalid_argument("generate: shard size must be positive");
    }
    const std::size_t shards = (o.count + o.shard_size - 1) / o.shard_size;
    std::vector<ShardOutput> outputs(shards);
    parallel_for(shards, o.threads, [&](std::size_t s) {
        const std::size_t quota = std::min(o.shard_size, o.count - s * o.shard_size);
        outputs[s] = run_shard(spec, o, s, quota);
    });

    GeneratedDataset ds;
    std::size_t attempts = 0, infeasible = 0, numerical = 0, invalid = 0, resamples = 0;
    std::vector<std::size_t> histogram(spec.n_max + 1, 0);
    nlohmann::ordered_json shard_stats = nlohmann::ordered_json::array();
    for (std::size_t s = 0; s < shards; ++s) {
        auto& out = outputs[s];
        attempts += out.attempts;
        infeasible += out.infeasible;
        numerical += out.numerical_failure;
        invalid += out.invalid;
        resamples += out.resamples;
        shard_stats.push_back({{"shard", s},
                               {"attempts", out.attempts},
                               {"accepted", out.records.size()},
                               {"infeasible", out.infeasible},
                               {"numerical_failure", out.numerical_failure},
                               {"invalid", out.invalid},
                               {"resamples", out.resamples}});
        for (auto& r : out.records) {
            ++histogram[r.problem.size()];
            ds.records.push_back(std::move(r));
        }
    }
    nlohmann::ordered_json counts = nlohmann::ordered_json::object();
    for (std::size_t n = spec.n_min; n <= spec.n_max; ++n) {
        counts[std::to_string(n)] = histogram[n];
    }
    const std::size_t dropped = infeasible + numerical + invalid;
    auto& m = ds.manifest;
    m["format"] = "frontier-dataset";
    m["format_version"] = kRecordFormatVersion;
    m["seed"] = o.seed;
    m["count"] = o.count;
    m["shard_size"] = o.shard_size;
    m["labelled"] = o.label;
    m["domain"] = domain_to_json(spec);
    m["solver"] = {{"scale", o.solver.scale},
                   {"ipm_tolerance", o.solver.ipm_tolerance},
                   {"max_iterations", o.solver.max_iterations},
                   {"kkt_tolerance", o.solver.kkt_tolerance}};
    m["attempts"] = attempts;
    m["accepted"] = ds.records.size();
    m["dropped"] = {{"infeasible", infeasible}, {"numerical_failure", numerical}, {"invalid", invalid}};
    m["drop_rate"] = attempts ? static_cast<double>(dropped) / static_cast<double>(attempts) : 0.0;
    m["structural_resamples"] = resamples;
    m["asset_counts"] = counts;
    m["shards"] = shard_stats;
    return ds;
}

void write_generated(const GeneratedDataset& dataset, const std::string& path) {
    write_dataset(path, dataset.records);
    std::ofstream out(path + ".manifest.json", std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write manifest next to '" + path + "'");
    }
    out << dataset.manifest.dump(2) << '\n';
}

}  // namespace frontier
