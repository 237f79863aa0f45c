#include "frontier/ipm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace frontier {

namespace {

constexpr double kStepFraction = 0.995;

double max_abs(const Eigen::Ref<const Matrix>& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

// Largest alpha in [0, 1] keeping v + alpha * dv >= 0.
double boundary_step(const Vector& v, const Vector& dv) {
    double alpha = 1.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (dv[i] < 0.0) {
            alpha = std::min(alpha, -v[i] / dv[i]);
        }
    }
    return alpha;
}

// Cholesky of the reduced normal matrix, shifting the diagonal when the
// factorization breaks down.
bool factor(const Matrix& m, Eigen::LLT<Matrix>& llt) {
    llt.compute(m);
    if (llt.info() == Eigen::Success) {
        return true;
    }
    const double base = 1e-14 * (1.0 + m.diagonal().cwiseAbs().maxCoeff());
    for (double shift = base; shift < 1e-4; shift *= 100.0) {
        llt.compute(m + shift * Matrix::Identity(m.rows(), m.cols()));
        if (llt.info() == Eigen::Success) {
            return true;
        }
    }
    return false;
}

}  // namespace

const char* to_string(IpmStatus status) {
    switch (status) {
        case IpmStatus::Optimal: return "optimal";
        case IpmStatus::Infeasible: return "infeasible";
        case IpmStatus::IterationLimit: return "iteration_limit";
        case IpmStatus::NumericalFailure: return "numerical_failure";
    }
    return "unknown";
}

IpmResult solve_qp(const QpProblem& qp, const IpmOptions& options) {
    const Eigen::Index n = qp.H.rows();
    IpmResult result;
    result.x = Vector::Zero(n);
    result.lambda = Vector::Zero(qp.A.rows());

    // Objective normalization keeps the Newton systems well scaled regardless
    // of the variance multiplier.
    double obj_scale = std::max(max_abs(qp.H), max_abs(qp.c));
    if (obj_scale == 0.0) {
        obj_scale = 1.0;
    }
    const Matrix H = qp.H / obj_scale;
    const Vector c = qp.c / obj_scale;

    // Unit infinity-norm rows; all-zero rows are either trivially satisfied or
    // prove infeasibility.
    std::vector<Eigen::Index> rows;
    std::vector<double> row_scale;
    for (Eigen::Index i = 0; i < qp.A.rows(); ++i) {
        const double r = qp.A.row(i).cwiseAbs().maxCoeff();
        if (r == 0.0) {
            if (qp.b[i] < -options.tolerance) {
                result.status = IpmStatus::Infeasible;
                return result;
            }
            continue;
        }
        rows.push_back(i);
        row_scale.push_back(r);
    }

    // A row pair a'x <= b, -a'x <= -b is an equality. Kept as two
    // inequalities both multipliers diverge and cancel, so pairs are solved as
    // equalities and their multiplier is reported on whichever row it signs.
    std::vector<char> paired(rows.size(), 0);
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t k = 0; k < rows.size(); ++k) {
        if (paired[k]) {
            continue;
        }
        for (std::size_t l = k + 1; l < rows.size(); ++l) {
            if (paired[l]) {
                continue;
            }
            const double bk = qp.b[rows[k]] / row_scale[k];
            const double bl = qp.b[rows[l]] / row_scale[l];
            if (bk == -bl && (qp.A.row(rows[k]) / row_scale[k] + qp.A.row(rows[l]) / row_scale[l]).isZero(0.0)) {
                paired[k] = paired[l] = 1;
                pairs.emplace_back(k, l);
                break;
            }
        }
    }
    std::vector<std::size_t> ineq;
    for (std::size_t k = 0; k < rows.size(); ++k) {
        if (!paired[k]) {
            ineq.push_back(k);
        }
    }
    const auto w = static_cast<Eigen::Index>(ineq.size());
    const auto e = static_cast<Eigen::Index>(pairs.size());
    Matrix A(w, n);
    Vector b(w);
    for (Eigen::Index k = 0; k < w; ++k) {
        A.row(k) = qp.A.row(rows[ineq[k]]) / row_scale[ineq[k]];
        b[k] = qp.b[rows[ineq[k]]] / row_scale[ineq[k]];
    }
    Matrix E(e, n);
    Vector be(e);
    for (Eigen::Index k = 0; k < e; ++k) {
        const std::size_t r = pairs[k].first;
        E.row(k) = qp.A.row(rows[r]) / row_scale[r];
        be[k] = qp.b[rows[r]] / row_scale[r];
    }

    Eigen::LLT<Matrix> llt;
    Vector x;
    {
        const Matrix m0 = H + A.transpose() * A + E.transpose() * E;
        if (!factor(m0, llt)) {
            result.status = IpmStatus::NumericalFailure;
            return result;
        }
        x = llt.solve(A.transpose() * b + E.transpose() * be - c);
    }
    Vector s = (b - A * x).cwiseMax(1.0);
    Vector lambda = Vector::Ones(w);
    Vector y = Vector::Zero(e);

    const double b_norm = std::max(max_abs(b), max_abs(be));
    const double c_norm = max_abs(c);
    Vector dx_aff, ds_aff, dl_aff, dy_aff, dx, ds, dl, dy;

    auto finish = [&](IpmStatus status, int iterations, double rp, double rd, double comp) {
        result.status = status;
        result.iterations = iterations;
        result.x = x;
        for (Eigen::Index k = 0; k < w; ++k) {
            result.lambda[rows[ineq[k]]] = lambda[k] * obj_scale / row_scale[ineq[k]];
        }
        for (Eigen::Index k = 0; k < e; ++k) {
            const std::size_t r = y[k] >= 0.0 ? pairs[k].first : pairs[k].second;
            result.lambda[rows[r]] = std::abs(y[k]) * obj_scale / row_scale[r];
        }
        result.slack = qp.b - qp.A * x;
        result.primal_residual = rp;
        result.dual_residual = rd;
        result.complementarity = comp;
        return result;
    };

    double rp_rel = 0.0, rd_rel = 0.0, comp_rel = 0.0;
    // Breakdown once primal feasibility and complementarity have converged
    // means the normal equations ran out of precision, not that the iterate
    // is wrong; the dual residual is then allowed a wider margin.
    auto breakdown = [&](int iter) {
        const bool stalled = rp_rel <= options.tolerance && comp_rel <= options.tolerance &&
                             rd_rel <= 1e3 * options.tolerance;
        return finish(stalled ? IpmStatus::Optimal : IpmStatus::NumericalFailure, iter, rp_rel, rd_rel, comp_rel);
    };
    for (int iter = 0; iter < options.max_iterations; ++iter) {
        const Vector r_d = H * x + c + A.transpose() * lambda + E.transpose() * y;
        const Vector r_p = A * x + s - b;
        const Vector r_e = E * x - be;
        const double gap = s.dot(lambda);
        const double mu = w > 0 ? gap / static_cast<double>(w) : 0.0;
        const double objective = 0.5 * x.dot(H * x) + c.dot(x);

        rp_rel = std::max(max_abs(r_p), max_abs(r_e)) / (1.0 + b_norm);
        rd_rel = max_abs(r_d) / (1.0 + c_norm);
        comp_rel = gap / (1.0 + std::abs(objective));
        if (rp_rel <= options.tolerance && rd_rel <= options.tolerance && comp_rel <= options.tolerance) {
            return finish(IpmStatus::Optimal, iter, rp_rel, rd_rel, comp_rel);
        }

        if (w > 0) {
            const double lambda_norm = std::max(lambda.maxCoeff(), max_abs(y));
            if (lambda_norm > 1e8) {
                const Vector yl = lambda / lambda_norm;
                const Vector ye = y / lambda_norm;
                if (max_abs(A.transpose() * yl + E.transpose() * ye) <= 1e-8 && b.dot(yl) + be.dot(ye) < -1e-8) {
                    return finish(IpmStatus::Infeasible, iter, rp_rel, rd_rel, comp_rel);
                }
            }
        }

        const Vector d = lambda.cwiseQuotient(s);
        const Matrix m = H + A.transpose() * d.asDiagonal() * A;
        if (!factor(m, llt)) {
            return breakdown(iter);
        }
        Matrix m_inv_et;
        Eigen::LLT<Matrix> schur;
        if (e > 0) {
            m_inv_et = llt.solve(E.transpose());
            if (!factor(E * m_inv_et, schur)) {
                return breakdown(iter);
            }
        }

        auto newton = [&](const Vector& r_c, Vector& out_dx, Vector& out_ds, Vector& out_dl, Vector& out_dy) {
            const Vector t = (r_c + lambda.cwiseProduct(r_p)).cwiseQuotient(s);
            const Vector g = -r_d - A.transpose() * t;
            out_dx = llt.solve(g);
            if (e > 0) {
                out_dy = schur.solve(E * out_dx + r_e);
                out_dx -= m_inv_et * out_dy;
            } else {
                out_dy = Vector::Zero(0);
            }
            const Vector a_dx = A * out_dx;
            out_ds = -r_p - a_dx;
            out_dl = t + d.cwiseProduct(a_dx);
        };

        // Predictor.
        const Vector sl = s.cwiseProduct(lambda);
        newton(-sl, dx_aff, ds_aff, dl_aff, dy_aff);
        double sigma = 0.0;
        if (w > 0) {
            const double alpha_aff = std::min(boundary_step(s, ds_aff), boundary_step(lambda, dl_aff));
            const double mu_aff =
                (s + alpha_aff * ds_aff).dot(lambda + alpha_aff * dl_aff) / static_cast<double>(w);
            sigma = std::pow(std::max(mu_aff, 0.0) / mu, 3.0);
        }

        // Corrector.
        const Vector r_c = (-sl - ds_aff.cwiseProduct(dl_aff)).array() + sigma * mu;
        newton(r_c, dx, ds, dl, dy);
        double alpha = std::min(1.0, kStepFraction * std::min(boundary_step(s, ds), boundary_step(lambda, dl)));
        if (w > 0 && (s + alpha * ds).dot(lambda + alpha * dl) >= gap) {
            // The second-order term can cycle on degenerate problems; fall
            // back to a plain centred step, which always reduces the gap.
            const Vector r_c2 = (-sl).array() + std::max(sigma, 0.1) * mu;
            newton(r_c2, dx, ds, dl, dy);
            alpha = std::min(1.0, kStepFraction * std::min(boundary_step(s, ds), boundary_step(lambda, dl)));
            // The quadratic term alpha^2 ds'dl (= dx'H dx when feasible) can
            // still outgrow the linear decrease on a long step.
            for (int k = 0; k < 30 && (s + alpha * ds).dot(lambda + alpha * dl) >= gap; ++k) {
                alpha *= 0.5;
            }
        }
        if (!(alpha > 0.0) || !dx.allFinite()) {
            return breakdown(iter);
        }

        x += alpha * dx;
        s += alpha * ds;
        lambda += alpha * dl;
        y += alpha * dy;
        s = s.cwiseMax(std::numeric_limits<double>::min());
        lambda = lambda.cwiseMax(std::numeric_limits<double>::min());
    }
    return finish(IpmStatus::IterationLimit, options.max_iterations, rp_rel, rd_rel, comp_rel);
}

}  // namespace frontier
