#pragma once

#include "frontier/problem.hpp"

#include <initializer_list>
#include <vector>

namespace fixtures {

inline frontier::Vector vec(std::initializer_list<double> v) {
    frontier::Vector out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) {
        out[i++] = x;
    }
    return out;
}

// Four assets, two classes, partial allocation.
inline frontier::EfProblem four_asset_two_class() {
    frontier::EfProblem p;
    p.returns = vec({0.12, 0.08, 0.05, 0.03});
    p.vols = vec({0.25, 0.18, 0.12, 0.08});
    p.corr = frontier::Matrix::Identity(4, 4);
    p.corr(0, 1) = p.corr(1, 0) = 0.3;
    p.corr(2, 3) = p.corr(3, 2) = 0.2;
    p.corr(0, 2) = p.corr(2, 0) = 0.1;
    p.x_min = frontier::Vector::Zero(4);
    p.x_max = vec({0.591, 0.749, 0.412, 0.545});
    p.classes = {0, 0, 1, 1};
    p.zeta_max = vec({0.74, 0.58});
    p.alpha_min = 0.81;
    p.alpha_max = 1.0;
    p.v_target = 0.1;
    return p;
}

// Two uncapped assets under full allocation.
inline frontier::EfProblem two_asset(double r1, double r2, double v1, double v2, double rho, double v_target) {
    frontier::EfProblem p;
    p.returns = vec({r1, r2});
    p.vols = vec({v1, v2});
    p.corr = frontier::Matrix::Identity(2, 2);
    p.corr(0, 1) = p.corr(1, 0) = rho;
    p.x_min = frontier::Vector::Zero(2);
    p.x_max = frontier::Vector::Ones(2);
    p.alpha_min = 1.0;
    p.alpha_max = 1.0;
    p.v_target = v_target;
    return p;
}

}  // namespace fixtures
