#include "frontier/datagen.hpp"
#include "frontier/ef_solver.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

using namespace frontier;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

bool has_close_pair(const Vector& v, double eps) {
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        for (Eigen::Index j = i + 1; j < v.size(); ++j) {
            if (std::abs(v[i] - v[j]) <= eps) {
                return true;
            }
        }
    }
    return false;
}

}  // namespace

TEST_CASE("sampled correlations are valid") {
    std::mt19937_64 rng(89);
    for (int i = 0; i < 500; ++i) {
        const std::size_t n = 2 + static_cast<std::size_t>(i % 11);
        const Matrix c = sample_correlation(rng, n);
        CHECK(c.diagonal().isOnes(1e-12));
        CHECK((c - c.transpose()).cwiseAbs().maxCoeff() == 0.0);
        CHECK(c.cwiseAbs().maxCoeff() <= 1.0);
        Eigen::SelfAdjointEigenSolver<Matrix> es(c);
        CHECK(es.eigenvalues().minCoeff() >= -1e-8);
    }
}

TEST_CASE("sampled problems are valid, in range and feasible") {
    DomainSpec spec;
    std::mt19937_64 rng(97);
    int full = 0;
    for (int i = 0; i < 2000; ++i) {
        const EfProblem p = sample_problem(rng, spec);
        CHECK(validate(p).ok());
        CHECK(structurally_feasible(p));
        CHECK(p.size() >= 2);
        CHECK(p.size() <= 12);
        CHECK(p.v_target >= 0.05);
        CHECK(p.v_target <= 0.15);
        CHECK(p.returns.minCoeff() >= -1.0);
        CHECK(p.returns.maxCoeff() <= 2.0);
        CHECK(p.vols.minCoeff() >= 0.0);
        CHECK(p.vols.maxCoeff() <= 2.0);
        CHECK(p.x_max.minCoeff() >= 0.01);
        CHECK(p.x_max.maxCoeff() <= 1.0);
        CHECK(p.x_min.isZero(0.0));
        CHECK(p.alpha_max == 1.0);
        CHECK(p.alpha_min >= 0.6);
        CHECK(p.class_count() <= 2);
        if (p.has_classes()) {
            CHECK(p.zeta_max.minCoeff() >= 0.2);
            CHECK(p.zeta_max.maxCoeff() <= 1.0);
        }
        full += p.alpha_min == 1.0 ? 1 : 0;
    }
    CHECK(full > 800);
    CHECK(full < 1200);
}

TEST_CASE("x_min can be sampled") {
    DomainSpec spec;
    spec.x_min_fraction = 0.5;
    std::mt19937_64 rng(101);
    bool positive = false;
    for (int i = 0; i < 100; ++i) {
        const EfProblem p = sample_problem(rng, spec);
        CHECK((p.x_min.array() <= 0.5 * p.x_max.array() + 1e-15).all());
        positive = positive || p.x_min.maxCoeff() > 0.0;
    }
    CHECK(positive);
}

TEST_CASE("discontinuity targeting") {
    DomainSpec spec;
    const DiscontinuityOptions opts = discontinuity_options(spec);
    CHECK(opts.return_eps == doctest::Approx(3e-3));
    CHECK(opts.vol_eps == doctest::Approx(2e-3));
    std::mt19937_64 rng(103);

    DiscontinuityOptions always = opts;
    always.probability = 1.0;
    for (int i = 0; i < 200; ++i) {
        const EfProblem p = target_discontinuities(sample_problem(rng, spec), rng, always, spec);
        CHECK((has_close_pair(p.returns, opts.return_eps) || has_close_pair(p.vols, opts.vol_eps)));
    }

    DiscontinuityOptions never = opts;
    never.probability = 0.0;
    const EfProblem base = sample_problem(rng, spec);
    const EfProblem same = target_discontinuities(base, rng, never, spec);
    CHECK(same.returns == base.returns);
    CHECK(same.vols == base.vols);

    int close = 0;
    const int trials = 10000;
    for (int i = 0; i < trials; ++i) {
        const EfProblem p = target_discontinuities(sample_problem(rng, spec), rng, opts, spec);
        close += (has_close_pair(p.returns, opts.return_eps) || has_close_pair(p.vols, opts.vol_eps)) ? 1 : 0;
    }
    CHECK(static_cast<double>(close) / trials >= 0.84);
}

TEST_CASE("generation is deterministic and thread independent") {
    DomainSpec spec;
    GenerateOptions g;
    g.count = 300;
    g.seed = 7;
    g.shard_size = 64;
    const GeneratedDataset a = generate(spec, g);
    g.threads = 3;
    const GeneratedDataset b = generate(spec, g);
    REQUIRE(a.records.size() == 300);
    REQUIRE(b.records.size() == 300);
    for (std::size_t i = 0; i < a.records.size(); ++i) {
        CHECK(record_to_line(a.records[i]) == record_to_line(b.records[i]));
    }
    g.seed = 8;
    const GeneratedDataset c = generate(spec, g);
    CHECK(record_to_line(a.records[0]) != record_to_line(c.records[0]));
}

TEST_CASE("generated labels satisfy their constraint systems") {
    DomainSpec spec;
    GenerateOptions g;
    g.count = 500;
    g.seed = 9;
    const GeneratedDataset ds = generate(spec, g);
    CHECK(ds.manifest.at("drop_rate").get<double>() < 0.05);
    for (const auto& rec : ds.records) {
        REQUIRE(rec.label.has_value());
        CHECK(rec.label->status == SolveStatus::Optimal);
        CHECK(rec.label->kkt_residual <= 1e-6);
        const CanonicalProblem c = canonicalize(rec.problem);
        const ConstraintSystem cs = build_constraints(c);
        const Vector x = to_canonical_order(c, rec.label->x);
        CHECK((cs.A * x - cs.b).maxCoeff() <= 1e-8);
    }
}

TEST_CASE("written datasets are byte-identical on rerun") {
    const auto dir = std::filesystem::temp_directory_path();
    const std::string p1 = (dir / "frontier_gen_a.jsonl").string();
    const std::string p2 = (dir / "frontier_gen_b.jsonl").string();
    DomainSpec spec;
    GenerateOptions g;
    g.count = 1000;
    g.seed = 10;
    write_generated(generate(spec, g), p1);
    write_generated(generate(spec, g), p2);
    CHECK(slurp(p1) == slurp(p2));
    CHECK_FALSE(slurp(p1 + ".manifest.json").empty());
    for (const auto& p : {p1, p2}) {
        std::remove(p.c_str());
        std::remove((p + ".manifest.json").c_str());
    }
}

TEST_CASE("domain validation and json round-trip") {
    DomainSpec spec;
    spec.n_max = 5;
    spec.discontinuity_eps = 2e-3;
    const DomainSpec back = domain_from_json(domain_to_json(spec));
    CHECK(back.n_max == 5);
    CHECK(back.discontinuity_eps == 2e-3);
    CHECK(back.returns.lo == -1.0);

    DomainSpec bad;
    bad.returns = {1.0, 0.5};
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = DomainSpec{};
    bad.n_max = 13;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("shard streams differ") {
    auto a = shard_rng(1, 0);
    auto b = shard_rng(1, 1);
    auto c = shard_rng(1, 0);
    const auto va = a();
    CHECK(va != b());
    CHECK(va == c());
}
