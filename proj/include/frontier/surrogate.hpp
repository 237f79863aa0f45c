#pragma once

#include "frontier/canonicalize.hpp"
#include "frontier/dgar.hpp"
#include "frontier/encoder.hpp"
#include "frontier/problem.hpp"
#include "frontier/tokenizer.hpp"

#include <span>
#include <vector>

namespace frontier {

struct PredictOptions {
    bool apply_dgar = true;
};

/// Everything a forward pass sees and produces, in canonical order.
struct SurrogatePass {
    CanonicalProblem canonical;
    Tokens tokens;
    Vector raw;        // sigmoid outputs
    Vector projected;  // after DGAR (equal to raw when disabled)
};

TokenLayout layout_for(const EncoderConfig& config);

/// canonicalize -> tokenize -> forward -> DGAR, without un-permuting.
/// The problem is assumed valid. Throws std::invalid_argument when it has
/// more assets than the model's n_max.
template <typename T>
SurrogatePass surrogate_pass(const EfProblem& problem, const Model<T>& model, const PredictOptions& options = {});

/// Surrogate allocation in the caller's asset order.
template <typename T>
Allocation predict(const EfProblem& problem, const Model<T>& model, const PredictOptions& options = {});

/// Order-preserving batch inference against one shared read-only model.
template <typename T>
std::vector<Allocation> predict_batch(std::span<const EfProblem> problems, const Model<T>& model,
                                      const PredictOptions& options = {}, unsigned threads = 1);

}  // namespace frontier
