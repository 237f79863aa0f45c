#pragma once

#include "frontier/canonicalize.hpp"
#include "frontier/ipm.hpp"
#include "frontier/problem.hpp"

#include <span>
#include <string>
#include <vector>

namespace frontier {

/// Linear constraints Ax <= b in fixed row order: n per-asset upper bounds,
/// n negated lower bounds, one all -1 row (-alpha_min), one all +1 row
/// (alpha_max), then one indicator row per class (zeta_max). w = 2n + 2 + m.
struct ConstraintSystem {
    Matrix A;
    Vector b;
    Matrix Q;          // scaled covariance
    double v_t = 0.0;  // v_target^2 * scale
    double scale = kDefaultVarianceScale;
    Vector x_min;
    Vector x_max;

    std::size_t assets() const { return static_cast<std::size_t>(A.cols()); }
};

ConstraintSystem build_constraints(const CanonicalProblem& canonical, double scale = kDefaultVarianceScale);

enum class Branch { MinVariance, MaxReturn };
enum class SolveStatus { Optimal, Infeasible, NumericalFailure };

const char* to_string(Branch branch);
const char* to_string(SolveStatus status);

struct SolverOptions {
    double scale = kDefaultVarianceScale;
    double ipm_tolerance = 1e-9;
    int max_iterations = 100;
    double kkt_tolerance = 1e-6;
    int max_bracket_iterations = 100;
};

/// One stage (QP or SOCP) of the frontier computation, on the canonical order.
struct StageResult {
    SolveStatus status = SolveStatus::NumericalFailure;
    Vector x;
    int iterations = 0;
    double kkt_residual = 0.0;
    std::string message;
};

/// minimize 1/2 x'Qx s.t. Ax <= b, then clip to [x_min, x_max].
StageResult solve_min_variance(const ConstraintSystem& cs, const SolverOptions& options = {});

/// maximize R'x s.t. Ax <= b and x'Qx <= v_t, then clip to [x_min, x_max].
///
/// Solved as a bracketed search over the risk-aversion weight of
/// maximize R'x - gamma/2 x'Qx, whose optimal variance is monotone in gamma.
/// `min_variance` may carry an already computed QP solution.
StageResult solve_max_return(const ConstraintSystem& cs, const Vector& returns, const SolverOptions& options = {},
                             const StageResult* min_variance = nullptr);

struct SolverResult {
    SolveStatus status = SolveStatus::NumericalFailure;
    Branch branch = Branch::MinVariance;
    Allocation allocation;  // original asset order
    int qp_iterations = 0;
    int socp_iterations = 0;
    double kkt_residual = 0.0;
    double v_min = 0.0;  // unscaled variance of the minimum-variance stage
    std::string message;
};

/// Cheap exact feasibility test of the box / total / class-cap polytope.
bool structurally_feasible(const EfProblem& problem, std::string* reason = nullptr);

/// Two-stage frontier solve of a problem that has already been canonicalized.
/// The allocation is mapped back through `canonical.perm`.
SolverResult solve_canonical(const CanonicalProblem& canonical, const SolverOptions& options = {});

/// canonicalize -> build_constraints -> QP -> (SOCP if QP variance < v_t).
/// Throws std::invalid_argument when `problem` fails validation.
SolverResult solve_ef(const EfProblem& problem, const SolverOptions& options = {});

/// Order-preserving parallel solve of independent problems.
std::vector<SolverResult> solve_batch(std::span<const EfProblem> problems, const SolverOptions& options = {},
                                      unsigned threads = 1);

/// The objective the two-stage program optimizes on `branch`: unscaled
/// variance for MinVariance, return for MaxReturn.
double ef_objective(const EfProblem& problem, const Vector& x, Branch branch);

}  // namespace frontier
