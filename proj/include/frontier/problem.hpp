#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <string>
#include <vector>

namespace frontier {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Variance multiplier applied before solving. Volatility targets are squared
/// and scaled the same way (v_t = v_target^2 * scale).
inline constexpr double kDefaultVarianceScale = 10000.0;

/// Smallest eigenvalue a correlation matrix may have and still count as PSD.
inline constexpr double kPsdTolerance = 1e-8;

/// One efficient-frontier instance.
///
/// `classes[i]` is the class of asset i and indexes into `zeta_max`. When
/// `zeta_max` is empty the instance has no class constraints and `classes` is
/// ignored (it may be empty).
struct EfProblem {
    Vector returns;
    Vector vols;
    Matrix corr;
    Vector x_min;
    Vector x_max;
    std::vector<int> classes;
    Vector zeta_max;
    double alpha_min = 0.0;
    double alpha_max = 1.0;
    double v_target = 0.0;

    std::size_t size() const { return static_cast<std::size_t>(returns.size()); }
    std::size_t class_count() const { return static_cast<std::size_t>(zeta_max.size()); }
    bool has_classes() const { return zeta_max.size() > 0; }
};

/// Weight vector plus the portfolio statistics it implies. Volatility is
/// unscaled: sqrt(x' diag(V) P diag(V) x).
struct Allocation {
    Vector x;
    double achieved_return = 0.0;
    double achieved_vol = 0.0;
};

Allocation make_allocation(const EfProblem& problem, Vector x);

struct Violation {
    std::string field;
    std::string violation;
    double measured = 0.0;
};

struct ValidationReport {
    std::vector<Violation> violations;

    bool ok() const { return violations.empty(); }
    std::string summary() const;
};

/// Lists every violated invariant of `problem`. Violations are data, not
/// errors: this never throws.
ValidationReport validate(const EfProblem& problem);

/// scale * diag(vols) * corr * diag(vols), explicitly symmetrized.
/// Throws std::invalid_argument on dimension mismatch.
Matrix covariance(const Vector& vols, const Matrix& corr, double scale = kDefaultVarianceScale);

/// Unscaled portfolio variance x' diag(V) P diag(V) x.
double portfolio_variance(const EfProblem& problem, const Vector& x);

/// Per-class allocation sums; empty when the problem has no classes.
Vector class_sums(const EfProblem& problem, const Vector& x);

}  // namespace frontier
