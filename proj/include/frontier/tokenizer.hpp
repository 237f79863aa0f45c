#pragma once

#include "frontier/canonicalize.hpp"

#include <cstddef>
#include <vector>

namespace frontier {

/// Fixed-width per-asset feature layout.
///
/// Columns: asset id, return, vol, x_max, x_min, class one-hot (3), class cap,
/// alpha_min, alpha_max, v_target, then the asset's correlation row padded
/// with zeros to n_max.
struct TokenLayout {
    std::size_t n_max = 12;

    static constexpr std::size_t kClassSlots = 3;
    static constexpr std::size_t kFixedColumns = 12;

    std::size_t feature_width() const { return kFixedColumns + n_max; }
    std::size_t correlation_column() const { return kFixedColumns; }
};

struct Tokens {
    Matrix features;                  // n_max x feature_width, padding rows zero
    std::vector<unsigned char> mask;  // 1 for real assets
    std::size_t active = 0;
};

/// Builds tokens from an already canonicalized problem.
/// Throws std::invalid_argument when the problem has more than n_max assets or
/// more classes than the one-hot slots.
Tokens tokenize(const CanonicalProblem& canonical, const TokenLayout& layout);

}  // namespace frontier
