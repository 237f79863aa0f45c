#include "frontier/canonicalize.hpp"

#include <algorithm>
#include <numeric>

namespace frontier {

EfProblem clamp_asset_caps(EfProblem p) {
    if (p.has_classes()) {
        for (std::size_t i = 0; i < p.size(); ++i) {
            p.x_max[i] = std::min(p.x_max[i], p.zeta_max[p.classes[i]]);
        }
    }
    for (std::size_t i = 0; i < p.size(); ++i) {
        p.x_min[i] = std::min(p.x_min[i], p.x_max[i]);
    }
    return p;
}

EfProblem normalize_classes(EfProblem p) {
    if (!p.has_classes()) {
        return p;
    }
    const std::size_t m = p.class_count();
    std::vector<int> members(m, 0);
    std::vector<std::size_t> last(m, 0);
    for (std::size_t i = 0; i < p.size(); ++i) {
        ++members[p.classes[i]];
        last[p.classes[i]] = i;
    }
    for (std::size_t j = 0; j < m; ++j) {
        if (members[j] == 0) {
            p.zeta_max[j] = 0.0;
        } else if (members[j] == 1) {
            p.zeta_max[j] = p.x_max[last[j]];
        }
    }
    return p;
}

EfProblem permute_assets(const EfProblem& p, const std::vector<std::size_t>& perm) {
    const auto n = static_cast<Eigen::Index>(perm.size());
    EfProblem out = p;
    for (Eigen::Index k = 0; k < n; ++k) {
        const auto src = static_cast<Eigen::Index>(perm[k]);
        out.returns[k] = p.returns[src];
        out.vols[k] = p.vols[src];
        out.x_min[k] = p.x_min[src];
        out.x_max[k] = p.x_max[src];
        if (!p.classes.empty()) {
            out.classes[k] = p.classes[src];
        }
        for (Eigen::Index l = 0; l < n; ++l) {
            out.corr(k, l) = p.corr(src, static_cast<Eigen::Index>(perm[l]));
        }
    }
    return out;
}

CanonicalProblem sort_by_returns(const EfProblem& p) {
    std::vector<std::size_t> perm(p.size());
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::stable_sort(perm.begin(), perm.end(),
                     [&](std::size_t a, std::size_t b) { return p.returns[a] > p.returns[b]; });
    return {permute_assets(p, perm), std::move(perm)};
}

CanonicalProblem canonicalize(const EfProblem& p) {
    return sort_by_returns(normalize_classes(clamp_asset_caps(p)));
}

CanonicalProblem as_canonical(EfProblem p) {
    std::vector<std::size_t> perm(p.size());
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    return {std::move(p), std::move(perm)};
}

Vector to_original_order(const CanonicalProblem& c, const Vector& canonical_x) {
    Vector out(canonical_x.size());
    for (std::size_t k = 0; k < c.perm.size(); ++k) {
        out[static_cast<Eigen::Index>(c.perm[k])] = canonical_x[static_cast<Eigen::Index>(k)];
    }
    return out;
}

Vector to_canonical_order(const CanonicalProblem& c, const Vector& original_x) {
    Vector out(original_x.size());
    for (std::size_t k = 0; k < c.perm.size(); ++k) {
        out[static_cast<Eigen::Index>(k)] = original_x[static_cast<Eigen::Index>(c.perm[k])];
    }
    return out;
}

}  // namespace frontier
