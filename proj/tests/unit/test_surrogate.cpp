#include "fixtures.hpp"
#include "frontier/datagen.hpp"
#include "frontier/surrogate.hpp"
#include "frontier/trainer.hpp"

#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

using namespace frontier;
using fixtures::vec;

namespace {

bool box_and_total_hold(const EfProblem& p, const Vector& x) {
    const double eps = 1e-12;
    const bool box = (x.array() >= p.x_min.array() - eps).all() && (x.array() <= p.x_max.array() + eps).all();
    return box && x.sum() >= p.alpha_min - 1e-12 && x.sum() <= p.alpha_max + 1e-12;
}

}  // namespace

TEST_CASE("layout_for checks the input width") {
    EncoderConfig c = tiny_config(4);
    CHECK(layout_for(c).n_max == 4);
    c.input_dim = 17;
    CHECK_THROWS_AS(layout_for(c), std::invalid_argument);
}

TEST_CASE("predictions satisfy the projected constraints for any weights") {
    DomainSpec spec;
    std::mt19937_64 rng(71);
    for (int i = 0; i < 200; ++i) {
        const Model<double> m = init_model<double>(tiny_config(12), static_cast<std::uint64_t>(i));
        const EfProblem p = sample_problem(rng, spec);
        const Allocation a = predict(p, m);
        // Clamping can only tighten the caps, so check against the problem's own box.
        CHECK(box_and_total_hold(canonicalize(p).problem, to_canonical_order(canonicalize(p), a.x)));
    }
}

TEST_CASE("disabling the projection breaks the total on some problems") {
    DomainSpec spec;
    std::mt19937_64 rng(73);
    PredictOptions raw;
    raw.apply_dgar = false;
    int violations = 0;
    for (int i = 0; i < 1000; ++i) {
        const Model<double> m = init_model<double>(tiny_config(12), static_cast<std::uint64_t>(1000 + i));
        const EfProblem p = sample_problem(rng, spec);
        const Vector x = predict(p, m, raw).x;
        if (x.sum() < p.alpha_min - 1e-9 || x.sum() > p.alpha_max + 1e-9) {
            ++violations;
        }
    }
    CHECK(violations >= 1);
}

TEST_CASE("prediction is invariant to asset order") {
    DomainSpec spec;
    std::mt19937_64 rng(79);
    const Model<double> m = init_model<double>(tiny_config(12), 3);
    for (int i = 0; i < 100; ++i) {
        const EfProblem p = sample_problem(rng, spec);
        std::vector<std::size_t> perm(p.size());
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        std::shuffle(perm.begin(), perm.end(), rng);
        const Vector a = predict(p, m).x;
        const Vector b = predict(permute_assets(p, perm), m).x;
        for (std::size_t k = 0; k < perm.size(); ++k) {
            CHECK(b[static_cast<Eigen::Index>(k)] == a[static_cast<Eigen::Index>(perm[k])]);
        }
    }
}

TEST_CASE("batch prediction matches single predictions") {
    DomainSpec spec;
    std::mt19937_64 rng(83);
    std::vector<EfProblem> problems;
    for (int i = 0; i < 30; ++i) {
        problems.push_back(sample_problem(rng, spec));
    }
    const Model<float> m = convert_model<float>(init_model<double>(tiny_config(12), 4));
    const auto batch = predict_batch<float>(problems, m, {}, 3);
    for (std::size_t i = 0; i < problems.size(); ++i) {
        CHECK(batch[i].x == predict(problems[i], m).x);
    }
}

TEST_CASE("too many assets for the model are rejected") {
    const Model<double> m = init_model<double>(tiny_config(3), 1);
    CHECK_THROWS_AS(predict(fixtures::four_asset_two_class(), m), std::invalid_argument);
}

TEST_CASE("cosine schedule endpoints") {
    TrainOptions o;
    o.steps = 101;
    o.lr_max = 1e-3;
    o.lr_min = 1e-5;
    CHECK(cosine_lr(o, 0) == doctest::Approx(1e-3));
    CHECK(cosine_lr(o, 50) == doctest::Approx(0.5 * (1e-3 + 1e-5)));
    CHECK(cosine_lr(o, 100) == doctest::Approx(1e-5));
}

TEST_CASE("a single example is memorized") {
    TrainOptions o;
    o.steps = 2000;
    o.batch_size = 1;
    o.lr_max = 1e-2;
    o.lr_min = 1e-4;
    o.weight_decay = 0.0;
    const EncoderConfig cfg = tiny_config(2);

    SUBCASE("raw outputs") {
        EfProblem p = fixtures::two_asset(0.1, 0.05, 0.2, 0.1, 0.3, 0.05);
        p.alpha_min = 0.6;
        const std::vector<TrainingExample> data{make_example(p, vec({0.3, 0.4}), layout_for(cfg))};
        o.dgar_in_loop = false;
        const TrainResult r = train(data, init_model<double>(cfg, 2), o);
        REQUIRE(r.loss_history.size() == 2000);
        CHECK(r.loss_history.back() < 1e-6);
        CHECK(r.loss_history.back() < 1e-3 * r.loss_history.front());
    }
    SUBCASE("projected outputs under full allocation") {
        // With a partial allocation a raw total below alpha_min sits on a flat
        // piece of the projection (the filled asset absorbs every change of
        // the others), so the full-allocation case is used here.
        const EfProblem p = fixtures::two_asset(0.1, 0.05, 0.2, 0.1, 0.3, 0.05);
        const std::vector<TrainingExample> data{make_example(p, vec({0.3, 0.7}), layout_for(cfg))};
        const TrainResult r = train(data, init_model<double>(cfg, 2), o);
        CHECK(r.loss_history.back() < 1e-6);
        CHECK(r.loss_history.back() < 1e-3 * r.loss_history.front());
    }
}

TEST_CASE("training is deterministic and thread-count independent") {
    DomainSpec spec;
    spec.n_max = 3;
    GenerateOptions g;
    g.count = 64;
    g.seed = 5;
    const GeneratedDataset ds = generate(spec, g);
    const EncoderConfig cfg = tiny_config(3);
    std::vector<TrainingExample> data;
    for (const auto& rec : ds.records) {
        data.push_back(make_example(rec.problem, rec.label->x, layout_for(cfg)));
    }
    TrainOptions o;
    o.steps = 30;
    o.batch_size = 16;
    o.lr_max = 1e-3;
    const Model<double> init = init_model<double>(cfg, 6);
    const TrainResult a = train(data, init, o);
    const TrainResult b = train(data, init, o);
    o.threads = 3;
    const TrainResult c = train(data, init, o);
    CHECK(a.loss_history == b.loss_history);
    CHECK(a.loss_history == c.loss_history);
    CHECK(a.model.params == c.model.params);
}

TEST_CASE("training refuses an empty dataset") {
    CHECK_THROWS_AS(train({}, init_model<double>(tiny_config(3), 1), TrainOptions{}), std::invalid_argument);
}

TEST_CASE("a NaN target aborts training") {
    const EfProblem p = fixtures::two_asset(0.1, 0.05, 0.2, 0.1, 0.3, 0.05);
    const EncoderConfig cfg = tiny_config(2);
    const std::vector<TrainingExample> data{
        make_example(p, vec({std::numeric_limits<double>::quiet_NaN(), 0.5}), layout_for(cfg))};
    TrainOptions o;
    o.steps = 5;
    o.batch_size = 1;
    CHECK_THROWS_AS(train(data, init_model<double>(cfg, 1), o), std::runtime_error);
}
