#include "frontier/surrogate.hpp"

#include "frontier/parallel.hpp"

namespace frontier {

TokenLayout layout_for(const EncoderConfig& config) {
    TokenLayout layout;
    layout.n_max = config.n_max;
    if (layout.feature_width() != config.input_dim) {
        throw std::invalid_argument("encoder input_dim does not match the token layout for n_max");
    }
    return layout;
}

template <typename T>
SurrogatePass surrogate_pass(const EfProblem& problem, const Model<T>& model, const PredictOptions& options) {
    SurrogatePass pass;
    pass.canonical = canonicalize(problem);
    pass.tokens = tokenize(pass.canonical, layout_for(model.config));
    pass.raw = forward_masked(model, pass.tokens.features, pass.tokens.mask).template cast<double>();
    pass.projected = options.apply_dgar ? dgar(pass.raw, dgar_constraints(pass.canonical.problem)) : pass.raw;
    return pass;
}

template <typename T>
Allocation predict(const EfProblem& problem, const Model<T>& model, const PredictOptions& options) {
    const SurrogatePass pass = surrogate_pass(problem, model, options);
    return make_allocation(problem, to_original_order(pass.canonical, pass.projected));
}

template <typename T>
std::vector<Allocation> predict_batch(std::span<const EfProblem> problems, const Model<T>& model,
                                      const PredictOptions& options, unsigned threads) {
    std::vector<Allocation> out(problems.size());
    parallel_for(problems.size(), threads, [&](std::size_t i) { out[i] = predict(problems[i], model, options); });
    return out;
}

template SurrogatePass surrogate_pass<float>(const EfProblem&, const Model<float>&, const PredictOptions&);
template SurrogatePass surrogate_pass<double>(const EfProblem&, const Model<double>&, const PredictOptions&);
template Allocation predict<float>(const EfProblem&, const Model<float>&, const PredictOptions&);
template Allocation predict<double>(const EfProblem&, const Model<double>&, const PredictOptions&);
template std::vector<Allocation> predict_batch<float>(std::span<const EfProblem>, const Model<float>&,
                                                      const PredictOptions&, unsigned);
template std::vector<Allocation> predict_batch<double>(std::span<const EfProblem>, const Model<double>&,
                                                       const PredictOptions&, unsigned);

}  // namespace frontier
