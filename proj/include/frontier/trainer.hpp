#pragma once

#include "frontier/encoder.hpp"
#include "frontier/surrogate.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace frontier {

/// One supervised pair in canonical order, tokens precomputed.
struct TrainingExample {
    CanonicalProblem canonical;
    Tokens tokens;
    DgarConstraints bounds;
    Vector target;  // exact allocation, canonical order
};

/// `exact_x` is in the problem's own asset order.
TrainingExample make_example(const EfProblem& problem, const Vector& exact_x, const TokenLayout& layout);

struct TrainOptions {
    std::size_t steps = 1000;
    std::size_t batch_size = 32;
    double lr_max = 5.5e-5;
    double lr_min = 1.0e-6;
    double weight_decay = 0.01;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_eps = 1e-8;
    std::uint64_t seed = 0;
    bool dgar_in_loop = true;
    /// Validation cadence in steps; 0 evaluates at every epoch boundary.
    std::size_t eval_every = 0;
    unsigned threads = 1;
};

struct ValidationPoint {
    std::size_t step = 0;
    double mae = 0.0;
};

struct TrainResult {
    Model<double> model;
    std::vector<double> loss_history;  // batch loss per step
    std::vector<double> lr_history;
    std::vector<ValidationPoint> validation;
};

/// Cosine annealing from lr_max at step 0 to lr_min at the last step.
double cosine_lr(const TrainOptions& options, std::size_t step);

/// Mean squared error per example: mean over assets of (y - target)^2 where
/// y is the (optionally DGAR-projected) model output.
double example_loss(const Model<double>& model, const TrainingExample& example, bool dgar_in_loop,
                    std::vector<double>* grad = nullptr);

/// Mean absolute weight error over `examples` with DGAR applied.
double mean_abs_error(const Model<double>& model, const std::vector<TrainingExample>& examples);

/// AdamW on the batch-mean loss. Deterministic given seed and data order:
/// gradients are reduced in fixed chunk order regardless of thread count.
/// Throws std::invalid_argument on an empty dataset and std::runtime_error
/// when the loss becomes non-finite.
TrainResult train(const std::vector<TrainingExample>& data, const Model<double>& initial, const TrainOptions& options,
                  const std::vector<TrainingExample>* validation = nullptr,
                  const std::function<void(std::size_t step, double loss)>& progress = {});

}  // namespace frontier
