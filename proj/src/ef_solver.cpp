#include "frontier/ef_solver.hpp"

#include "frontier/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace frontier {

namespace {

double max_abs(const Eigen::Ref<const Matrix>& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

Vector clip(const Vector& x, const ConstraintSystem& cs) { return x.cwiseMax(cs.x_min).cwiseMin(cs.x_max); }

// Largest relative violation among stationarity, primal feasibility, dual
// feasibility and complementarity of min 1/2 x'Hx + c'x s.t. Ax <= b.
double kkt_residual(const Matrix& H, const Vector& c, const Matrix& A, const Vector& b, const Vector& x,
                    const Vector& lambda) {
    double s = std::max(max_abs(H), max_abs(c));
    if (s == 0.0) {
        s = 1.0;
    }
    const double stationarity = max_abs(H * x + c + A.transpose() * lambda) / s / (1.0 + max_abs(c) / s);
    const Vector ax = A * x;
    const double primal = max_abs((ax - b).cwiseMax(0.0)) / (1.0 + max_abs(b));
    const double dual = max_abs((-lambda).cwiseMax(0.0)) / s;
    const double objective = 0.5 * x.dot(H * x) + c.dot(x);
    const double comp = std::abs(lambda.dot((b - ax).cwiseMax(0.0))) / s / (1.0 + std::abs(objective) / s);
    return std::max({stationarity, primal, dual, comp});
}

struct InnerSolve {
    IpmStatus status = IpmStatus::NumericalFailure;
    Vector x;
    Vector lambda;
    double gamma = 0.0;
    double variance = 0.0;
};

Vector inverse_permutation_apply(const CanonicalProblem& canonical, const Vector& x) {
    return to_original_order(canonical, x);
}

std::vector<std::size_t> inverse(const std::vector<std::size_t>& perm) {
    std::vector<std::size_t> inv(perm.size());
    for (std::size_t k = 0; k < perm.size(); ++k) {
        inv[perm[k]] = k;
    }
    return inv;
}

}  // namespace

const char* to_string(Branch branch) {
    return branch == Branch::MinVariance ? "min_variance" : "max_return";
}

const char* to_string(SolveStatus status) {
    switch (status) {
        case SolveStatus::Optimal: return "optimal";
        case SolveStatus::Infeasible: return "infeasible";
        case SolveStatus::NumericalFailure: return "numerical_failure";
    }
    return "unknown";
}

ConstraintSystem build_constraints(const CanonicalProblem& canonical, double scale) {
    const EfProblem& p = canonical.problem;
    const auto n = static_cast<Eigen::Index>(p.size());
    const auto m = static_cast<Eigen::Index>(p.class_count());
    const Eigen::Index w = 2 * n + 2 + m;

    ConstraintSystem cs;
    cs.A = Matrix::Zero(w, n);
    cs.b = Vector::Zero(w);
    for (Eigen::Index i = 0; i < n; ++i) {
        cs.A(i, i) = 1.0;
        cs.b[i] = p.x_max[i];
        cs.A(n + i, i) = -1.0;
        cs.b[n + i] = 0.0 - p.x_min[i];
    }
    cs.A.row(2 * n).setConstant(-1.0);
    cs.b[2 * n] = -p.alpha_min;
    cs.A.row(2 * n + 1).setConstant(1.0);
    cs.b[2 * n + 1] = p.alpha_max;
    for (Eigen::Index j = 0; j < m; ++j) {
        for (Eigen::Index i = 0; i < n; ++i) {
            if (p.classes[static_cast<std::size_t>(i)] == j) {
                cs.A(2 * n + 2 + j, i) = 1.0;
            }
        }
        cs.b[2 * n + 2 + j] = p.zeta_max[j];
    }

    cs.Q = covariance(p.vols, p.corr, scale);
    cs.v_t = p.v_target * p.v_target * scale;
    cs.scale = scale;
    cs.x_min = p.x_min;
    cs.x_max = p.x_max;
    return cs;
}

StageResult solve_min_variance(const ConstraintSystem& cs, const SolverOptions& options) {
    StageResult out;
    const auto n = static_cast<Eigen::Index>(cs.assets());
    const Vector zero = Vector::Zero(n);
    const IpmResult r = solve_qp({cs.Q, zero, cs.A, cs.b}, {options.ipm_tolerance, options.max_iterations});
    out.iterations = r.iterations;
    if (r.status == IpmStatus::Infeasible) {
        out.status = SolveStatus::Infeasible;
        out.message = "minimum-variance QP: infeasibility certificate";
        return out;
    }
    if (r.status != IpmStatus::Optimal) {
        out.status = SolveStatus::NumericalFailure;
        out.message = std::string("minimum-variance QP: ") + to_string(r.status);
        return out;
    }
    out.x = clip(r.x, cs);
    out.kkt_residual = kkt_residual(cs.Q, zero, cs.A, cs.b, out.x, r.lambda);
    if (out.kkt_residual <= options.kkt_tolerance) {
        out.status = SolveStatus::Optimal;
    } else {
        out.status = SolveStatus::NumericalFailure;
        out.message = "minimum-variance QP: KKT residual above tolerance";
    }
    return out;
}

StageResult solve_max_return(const ConstraintSystem& cs, const Vector& returns, const SolverOptions& options,
                             const StageResult* min_variance) {
    StageResult out;
    StageResult local_qp;
    auto qp_solution = [&]() -> const StageResult& {
        if (min_variance == nullptr) {
            local_qp = solve_min_variance(cs, options);
            min_variance = &local_qp;
        }
        return *min_variance;
    };

    const double qn = max_abs(cs.Q);
    const double rn = max_abs(returns);
    if (rn == 0.0) {
        // Flat objective: every feasible point is optimal, the QP point included.
        out = qp_solution();
        return out;
    }
    const Matrix q_hat = qn > 0.0 ? Matrix(cs.Q / qn) : Matrix::Zero(cs.Q.rows(), cs.Q.cols());
    const Vector c = -returns / rn;
    const IpmOptions ipm{options.ipm_tolerance, options.max_iterations};

    int iterations = 0;
    auto inner = [&](double gamma) {
        const IpmResult r = solve_qp({gamma * q_hat, c, cs.A, cs.b}, ipm);
        iterations += r.iterations;
        InnerSolve s;
        s.status = r.status;
        s.gamma = gamma;
        s.lambda = r.lambda;
        s.x = clip(r.x, cs);
        s.variance = s.x.dot(cs.Q * s.x);
        return s;
    };
    auto fail = [&](const InnerSolve& s, const char* what) {
        out.status = s.status == IpmStatus::Infeasible ? SolveStatus::Infeasible : SolveStatus::NumericalFailure;
        out.iterations = iterations;
        out.message = std::string("max-return stage ") + what + ": " + to_string(s.status);
        return out;
    };

    constexpr double kGammaLow = 1e-9;
    constexpr double kGammaHigh = 1e12;

    InnerSolve lo = inner(qn > 0.0 ? kGammaLow : 0.0);
    if (lo.status != IpmStatus::Optimal) {
        return fail(lo, "(linear regime)");
    }

    Vector x;
    Vector lambda;
    double gamma = lo.gamma;
    if (lo.variance <= cs.v_t) {
        // The cone is inactive: the (minimum-variance) LP optimum already fits.
        x = lo.x;
        lambda = lo.lambda;
    } else {
        InnerSolve hi = inner(kGammaHigh);
        if (hi.status != IpmStatus::Optimal) {
            return fail(hi, "(upper bracket)");
        }
        bool hi_is_qp = false;
        if (hi.variance > cs.v_t) {
            const StageResult& qp = qp_solution();
            if (qp.status != SolveStatus::Optimal) {
                out.status = qp.status;
                out.iterations = iterations;
                out.message = qp.message;
                return out;
            }
            lo = hi;
            hi.x = qp.x;
            hi.variance = qp.x.dot(cs.Q * qp.x);
            hi_is_qp = true;
        } else {
            // Illinois regula falsi on f(u) = var(10^u) / v_t - 1, which is
            // continuous and non-increasing in u.
            double u_lo = std::log10(lo.gamma);
            double u_hi = std::log10(hi.gamma);
            double f_lo = lo.variance / cs.v_t - 1.0;
            double f_hi = hi.variance / cs.v_t - 1.0;
            int side = 0;
            for (int it = 0; it < options.max_bracket_iterations; ++it) {
                if (u_hi - u_lo < 1e-13 * std::max(1.0, std::abs(u_hi))) {
                    break;
                }
                if (lo.variance - hi.variance <= 1e-13 * cs.v_t || max_abs(lo.x - hi.x) <= 1e-12) {
                    break;
                }
                const double width = u_hi - u_lo;
                double u = (u_lo * f_hi - u_hi * f_lo) / (f_hi - f_lo);
                if (!(u > u_lo + 1e-3 * width && u < u_hi - 1e-3 * width) || it % 5 == 4) {
                    u = 0.5 * (u_lo + u_hi);
                }
                InnerSolve mid = inner(std::pow(10.0, u));
                if (mid.status != IpmStatus::Optimal) {
                    return fail(mid, "(bracketing)");
                }
                const double f = mid.variance / cs.v_t - 1.0;
                if (f > 0.0) {
                    lo = std::move(mid);
                    u_lo = u;
                    f_lo = f;
                    if (side == -1) {
                        f_hi *= 0.5;
                    }
                    side = -1;
                } else {
                    hi = std::move(mid);
                    u_hi = u;
                    f_hi = f;
                    if (side == 1) {
                        f_lo *= 0.5;
                    }
                    side = 1;
                }
            }
        }

        // Both bracket points lie in the box and the linear polytope; the
        // segment between them crosses the cone boundary exactly once.
        const double target = cs.v_t * (1.0 - 1e-12);
        const Vector d = lo.x - hi.x;
        const Vector qd = cs.Q * d;
        const double a = d.dot(qd);
        const double bq = hi.x.dot(qd);
        const double c0 = hi.variance - target;
        double theta = 0.0;
        if (c0 < 0.0) {
            if (a > 0.0) {
                theta = (-bq + std::sqrt(std::max(0.0, bq * bq - a * c0))) / a;
            } else if (bq > 0.0) {
                theta = -c0 / (2.0 * bq);
            }
            theta = std::clamp(theta, 0.0, 1.0);
        }
        x = hi.x + theta * d;
        if (hi_is_qp) {
            lambda = lo.lambda;
            gamma = lo.gamma;
        } else {
            lambda = hi.lambda + theta * (lo.lambda - hi.lambda);
            gamma = hi.gamma + theta * (lo.gamma - hi.gamma);
        }
    }

    out.x = x;
    out.iterations = iterations;
    const double variance = x.dot(cs.Q * x);
    double residual = kkt_residual(gamma * q_hat, c, cs.A, cs.b, x, lambda);
    const double s_obj = std::max(gamma, 1.0);
    if (cs.v_t > 0.0) {
        residual = std::max(residual, std::max(0.0, variance - cs.v_t) / cs.v_t);
    }
    if (qn > 0.0) {
        const double cone_comp = 0.5 * gamma * std::abs(variance - cs.v_t) / qn / s_obj / (1.0 + std::abs(c.dot(x)) / s_obj);
        residual = std::max(residual, cone_comp);
    }
    out.kkt_residual = residual;
    if (residual <= options.kkt_tolerance) {
        out.status = SolveStatus::Optimal;
    } else {
        out.status = SolveStatus::NumericalFailure;
        out.message = "max-return stage: KKT residual above tolerance";
    }
    return out;
}

bool structurally_feasible(const EfProblem& p, std::string* reason) {
    constexpr double kTol = 1e-10;
    auto reject = [&](const char* why) {
        if (reason != nullptr) {
            *reason = why;
        }
        return false;
    };
    if (p.x_min.sum() > p.alpha_max + kTol) {
        return reject("sum of x_min exceeds alpha_max");
    }
    double reachable = 0.0;
    if (p.has_classes()) {
        const Vector min_sums = class_sums(p, p.x_min);
        const Vector max_sums = class_sums(p, p.x_max);
        for (Eigen::Index j = 0; j < min_sums.size(); ++j) {
            if (min_sums[j] > p.zeta_max[j] + kTol) {
                return reject("class minimum allocation exceeds its cap");
            }
            reachable += std::min(p.zeta_max[j], max_sums[j]);
        }
    } else {
        reachable = p.x_max.sum();
    }
    if (reachable < p.alpha_min - kTol) {
        return reject("alpha_min unreachable under asset and class caps");
    }
    return true;
}

SolverResult solve_canonical(const CanonicalProblem& canonical, const SolverOptions& options) {
    SolverResult res;
    const EfProblem& p = canonical.problem;
    if (!structurally_feasible(p, &res.message)) {
        res.status = SolveStatus::Infeasible;
        return res;
    }

    const ConstraintSystem cs = build_constraints(canonical, options.scale);
    const StageResult qp = solve_min_variance(cs, options);
    res.qp_iterations = qp.iterations;
    if (qp.status != SolveStatus::Optimal) {
        res.status = qp.status;
        res.message = qp.message;
        return res;
    }
    const double variance = qp.x.dot(cs.Q * qp.x);
    res.v_min = variance / options.scale;

    Vector x = qp.x;
    res.kkt_residual = qp.kkt_residual;
    res.branch = Branch::MinVariance;
    if (variance < cs.v_t) {
        const StageResult socp = solve_max_return(cs, p.returns, options, &qp);
        res.socp_iterations = socp.iterations;
        res.branch = Branch::MaxReturn;
        if (socp.status != SolveStatus::Optimal) {
            res.status = socp.status;
            res.message = socp.message;
            return res;
        }
        x = socp.x;
        res.kkt_residual = socp.kkt_residual;
    }

    const EfProblem original = permute_assets(p, inverse(canonical.perm));
    res.allocation = make_allocation(original, inverse_permutation_apply(canonical, x));
    res.status = SolveStatus::Optimal;
    return res;
}

SolverResult solve_ef(const EfProblem& problem, const SolverOptions& options) {
    const ValidationReport report = validate(problem);
    if (!report.ok()) {
        throw std::invalid_argument("solve_ef: invalid problem\n" + report.summary());
    }
    return solve_canonical(canonicalize(problem), options);
}

std::vector<SolverResult> solve_batch(std::span<const EfProblem> problems, const SolverOptions& options,
                                      unsigned threads) {
    std::vector<SolverResult> results(problems.size());
    parallel_for(problems.size(), threads, [&](std::size_t i) { results[i] = solve_ef(problems[i], options); });
    return results;
}

double ef_objective(const EfProblem& problem, const Vector& x, Branch branch) {
    return branch == Branch::MinVariance ? portfolio_variance(problem, x) : problem.returns.dot(x);
}

}  // namespace frontier
