#include "frontier/tokenizer.hpp"

#include <stdexcept>
#include <string>

namespace frontier {

Tokens tokenize(const CanonicalProblem& canonical, const TokenLayout& layout) {
    const EfProblem& p = canonical.problem;
    const std::size_t n = p.size();
    if (n > layout.n_max) {
        throw std::invalid_argument("tokenize: " + std::to_string(n) + " assets exceeds n_max " +
                                    std::to_string(layout.n_max));
    }
    if (p.class_count() > TokenLayout::kClassSlots) {
        throw std::invalid_argument("tokenize: more than 3 classes");
    }

    Tokens t;
    t.features = Matrix::Zero(static_cast<Eigen::Index>(layout.n_max),
                              static_cast<Eigen::Index>(layout.feature_width()));
    t.mask.assign(layout.n_max, 0);
    t.active = n;

    const auto corr_col = static_cast<Eigen::Index>(layout.correlation_column());
    for (std::size_t k = 0; k < n; ++k) {
        const auto i = static_cast<Eigen::Index>(k);
        auto row = t.features.row(i);
        row(0) = n > 1 ? static_cast<double>(k) / static_cast<double>(n - 1) : 0.0;
        row(1) = p.returns[i];
        row(2) = p.vols[i];
        row(3) = p.x_max[i];
        row(4) = p.x_min[i];
        double cap = p.x_max[i];
        if (p.has_classes()) {
            const int cls = p.classes[k];
            row(5 + cls) = 1.0;
            cap = p.zeta_max[cls];
        }
        row(8) = cap;
        row(9) = p.alpha_min;
        row(10) = p.alpha_max;
        row(11) = p.v_target;
        row.segment(corr_col, static_cast<Eigen::Index>(n)) = p.corr.row(i);
        t.mask[k] = 1;
    }
    return t;
}

}  // namespace frontier
