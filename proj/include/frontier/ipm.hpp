#pragma once

#include "frontier/problem.hpp"

namespace frontier {

/// minimize 1/2 x'Hx + c'x  subject to  Ax <= b, with H symmetric PSD.
struct QpProblem {
    Matrix H;
    Vector c;
    Matrix A;
    Vector b;
};

struct IpmOptions {
    double tolerance = 1e-9;
    int max_iterations = 100;
};

enum class IpmStatus { Optimal, Infeasible, IterationLimit, NumericalFailure };

/// Residuals are relative, measured on the objective-normalized problem.
struct IpmResult {
    IpmStatus status = IpmStatus::NumericalFailure;
    Vector x;
    Vector lambda;  // multipliers of Ax <= b, in the caller's objective units
    Vector slack;   // b - Ax at the final iterate
    int iterations = 0;
    double primal_residual = 0.0;
    double dual_residual = 0.0;
    double complementarity = 0.0;
};

/// Dense infeasible-start primal-dual interior-point method with Mehrotra
/// predictor-corrector steps. Intended for small problems (tens of variables).
IpmResult solve_qp(const QpProblem& qp, const IpmOptions& options = {});

const char* to_string(IpmStatus status);

}  // namespace frontier
