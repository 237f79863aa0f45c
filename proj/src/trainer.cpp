#include "frontier/trainer.hpp"

#include "frontier/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

namespace frontier {

namespace {

constexpr std::size_t kChunk = 8;

}  // namespace

TrainingExample make_example(const EfProblem& problem, const Vector& exact_x, const TokenLayout& layout) {
    TrainingExample ex;
    ex.canonical = canonicalize(problem);
    ex.tokens = tokenize(ex.canonical, layout);
    ex.bounds = dgar_constraints(ex.canonical.problem);
    ex.target = to_canonical_order(ex.canonical, exact_x);
    return ex;
}

double cosine_lr(const TrainOptions& o, std::size_t step) {
    if (o.steps <= 1) {
        return o.lr_max;
    }
    const double t = static_cast<double>(std::min(step, o.steps - 1)) / static_cast<double>(o.steps - 1);
    return o.lr_min + 0.5 * (o.lr_max - o.lr_min) * (1.0 + std::cos(M_PI * t));
}

double example_loss(const Model<double>& model, const TrainingExample& ex, bool dgar_in_loop,
                    std::vector<double>* grad) {
    ForwardCache<double> cache;
    const Vector raw = forward_masked(model, ex.tokens.features, ex.tokens.mask, &cache);
    const auto n = static_cast<double>(raw.size());
    if (!dgar_in_loop) {
        const Vector diff = raw - ex.target;
        if (grad) {
            backward(model, cache, Vector((2.0 / n) * diff), *grad);
        }
        return diff.squaredNorm() / n;
    }
    const DgarTrace trace = dgar_with_jacobian(raw, ex.bounds);
    const Vector diff = trace.output - ex.target;
    if (grad) {
        backward(model, cache, Vector(trace.jacobian.transpose() * ((2.0 / n) * diff)), *grad);
    }
    return diff.squaredNorm() / n;
}

double mean_abs_error(const Model<double>& model, const std::vector<TrainingExample>& examples) {
    double total = 0.0;
    std::size_t count = 0;
    for (const auto& ex : examples) {
        const Vector raw = forward_masked(model, ex.tokens.features, ex.tokens.mask);
        total += (dgar(raw, ex.bounds) - ex.target).cwiseAbs().sum();
        count += static_cast<std::size_t>(raw.size());
    }
    return count ? total / static_cast<double>(count) : 0.0;
}

TrainResult train(const std::vector<TrainingExample>& data, const Model<double>& initial, const TrainOptions& o,
                  const std::vector<TrainingExample>* validation,
                  const std::function<void(std::size_t, double)>& progress) {
    if (data.empty()) {
        throw std::invalid_argument("train: empty dataset");
    }
    if (o.batch_size == 0) {
        throw std::invalid_argument("train: batch size must be positive");
    }
    TrainResult result{initial, {}, {}, {}};
    Model<double>& model = result.model;
    const std::size_t p = model.params.size();
    std::vector<double> m(p, 0.0), v(p, 0.0), grad(p);
    std::vector<char> decay(p, 0);
    for (const auto& t : model.layout.tensors()) {
        std::fill(decay.begin() + static_cast<std::ptrdiff_t>(t.offset),
                  decay.begin() + static_cast<std::ptrdiff_t>(t.offset + t.size()), t.decay ? 1 : 0);
    }

    std::mt19937_64 rng(o.seed);
    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);
    std::size_t cursor = 0;
    std::size_t samples_seen = 0;
    const std::size_t batch = std::min(o.batch_size, data.size());

    auto record_validation = [&](std::size_t step) {
        if (validation && !validation->empty()) {
            result.validation.push_back({step, mean_abs_error(model, *validation)});
        }
    };
    record_validation(0);

    for (std::size_t step = 0; step < o.steps; ++step) {
        std::vector<std::size_t> picked(batch);
        for (std::size_t b = 0; b < batch; ++b) {
            if (cursor == order.size()) {
                std::shuffle(order.begin(), order.end(), rng);
                cursor = 0;
            }
            picked[b] = order[cursor++];
        }

        const std::size_t chunks = (batch + kChunk - 1) / kChunk;
        std::vector<std::vector<double>> chunk_grad(chunks, std::vector<double>(p, 0.0));
        std::vector<double> chunk_loss(chunks, 0.0);
        parallel_for(chunks, o.threads, [&](std::size_t c) {
            const std::size_t end = std::min(batch, (c + 1) * kChunk);
            for (std::size_t b = c * kChunk; b < end; ++b) {
                chunk_loss[c] += example_loss(model, data[picked[b]], o.dgar_in_loop, &chunk_grad[c]);
            }
        });
        std::fill(grad.begin(), grad.end(), 0.0);
        double loss = 0.0;
        for (std::size_t c = 0; c < chunks; ++c) {
            loss += chunk_loss[c];
            for (std::size_t i = 0; i < p; ++i) {
                grad[i] += chunk_grad[c][i];
            }
        }
        const double inv = 1.0 / static_cast<double>(batch);
        loss *= inv;
        if (!std::isfinite(loss)) {
            std::ostringstream msg;
            msg << "train: non-finite loss " << loss << " at step " << step;
            throw std::runtime_error(msg.str());
        }

        const double lr = cosine_lr(o, step);
        const double t = static_cast<double>(step + 1);
        const double c1 = 1.0 - std::pow(o.beta1, t);
        const double c2 = 1.0 - std::pow(o.beta2, t);
        for (std::size_t i = 0; i < p; ++i) {
            const double g = grad[i] * inv;
            m[i] = o.beta1 * m[i] + (1.0 - o.beta1) * g;
            v[i] = o.beta2 * v[i] + (1.0 - o.beta2) * g * g;
            double update = (m[i] / c1) / (std::sqrt(v[i] / c2) + o.adam_eps);
            if (decay[i]) {
                update += o.weight_decay * model.params[i];
            }
            model.params[i] -= lr * update;
        }
        result.loss_history.push_back(loss);
        result.lr_history.push_back(lr);
        if (progress) {
            progress(step, loss);
        }

        const std::size_t before = samples_seen;
        samples_seen += batch;
        const bool boundary = o.eval_every ? (step + 1) % o.eval_every == 0
                                           : samples_seen / data.size() != before / data.size();
        if (boundary) {
            record_validation(step + 1);
        }
    }
    return result;
}

}  // namespace frontier
