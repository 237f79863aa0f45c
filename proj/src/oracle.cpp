#include "frontier/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <vector>

namespace frontier {

namespace {

// Feasible set of the raw problem as rows a'x <= b.
struct Polytope {
    Matrix A;
    Vector b;
};

Polytope make_polytope(const EfProblem& p) {
    const auto n = static_cast<Eigen::Index>(p.size());
    std::vector<Vector> rows;
    std::vector<double> rhs;
    for (Eigen::Index i = 0; i < n; ++i) {
        Vector r = Vector::Zero(n);
        r[i] = 1.0;
        rows.push_back(r);
        rhs.push_back(p.x_max[i]);
        rows.push_back(-r);
        rhs.push_back(-p.x_min[i]);
    }
    rows.push_back(Vector::Ones(n));
    rhs.push_back(p.alpha_max);
    rows.push_back(-Vector::Ones(n));
    rhs.push_back(-p.alpha_min);
    for (std::size_t j = 0; j < p.class_count(); ++j) {
        Vector r = Vector::Zero(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            if (p.classes[static_cast<std::size_t>(i)] == static_cast<int>(j)) {
                r[i] = 1.0;
            }
        }
        if (r.sum() > 0.0) {
            rows.push_back(r);
            rhs.push_back(p.zeta_max[static_cast<Eigen::Index>(j)]);
        }
    }
    Polytope poly;
    poly.A.resize(static_cast<Eigen::Index>(rows.size()), n);
    poly.b.resize(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t k = 0; k < rows.size(); ++k) {
        poly.A.row(static_cast<Eigen::Index>(k)) = rows[k].transpose();
        poly.b[static_cast<Eigen::Index>(k)] = rhs[k];
    }
    return poly;
}

bool inside(const Polytope& poly, const Vector& x, double tol) {
    return ((poly.A * x - poly.b).array() <= tol).all();
}

// Hit-and-run walk from a feasible start: random direction, uniform step
// along the chord through the polytope. Fixed assets stay put and, under a
// fixed total, directions are recentred so the total is preserved.
template <typename Visit>
void hit_and_run(const Polytope& poly, const EfProblem& p, Vector x, std::size_t steps, double tol,
                 std::mt19937_64& rng, Visit&& visit) {
    const auto n = x.size();
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<bool> free(static_cast<std::size_t>(n));
    Eigen::Index free_count = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        free[static_cast<std::size_t>(i)] = p.x_max[i] - p.x_min[i] > tol;
        free_count += free[static_cast<std::size_t>(i)] ? 1 : 0;
    }
    const bool fixed_total = p.alpha_max - p.alpha_min <= tol;
    if (free_count == 0 || (fixed_total && free_count < 2)) {
        return;
    }
    Vector d(n);
    for (std::size_t s = 0; s < steps; ++s) {
        double mean = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            d[i] = free[static_cast<std::size_t>(i)] ? normal(rng) : 0.0;
            mean += d[i];
        }
        if (fixed_total) {
            mean /= static_cast<double>(free_count);
            for (Eigen::Index i = 0; i < n; ++i) {
                if (free[static_cast<std::size_t>(i)]) {
                    d[i] -= mean;
                }
            }
        }
        const Vector ad = poly.A * d;
        const Vector slack = (poly.b - poly.A * x).cwiseMax(0.0);
        double lo = -std::numeric_limits<double>::infinity();
        double hi = std::numeric_limits<double>::infinity();
        for (Eigen::Index r = 0; r < ad.size(); ++r) {
            if (ad[r] > 1e-12) {
                hi = std::min(hi, slack[r] / ad[r]);
            } else if (ad[r] < -1e-12) {
                lo = std::max(lo, slack[r] / ad[r]);
            }
        }
        if (!(hi > lo) || !std::isfinite(lo) || !std::isfinite(hi)) {
            continue;
        }
        const Vector next = x + (lo + (hi - lo) * unit(rng)) * d;
        if (inside(poly, next, tol)) {
            x = next;
            visit(x);
        }
    }
}

// Feasible step interval [lo, hi] along d from x, linear constraints only.
void linear_interval(const Polytope& poly, const Vector& x, const Vector& d, double& lo, double& hi) {
    lo = -std::numeric_limits<double>::infinity();
    hi = std::numeric_limits<double>::infinity();
    const Vector ad = poly.A * d;
    const Vector slack = poly.b - poly.A * x;
    for (Eigen::Index k = 0; k < ad.size(); ++k) {
        const double s = std::max(slack[k], 0.0);
        if (ad[k] > 1e-15) {
            hi = std::min(hi, s / ad[k]);
        } else if (ad[k] < -1e-15) {
            lo = std::max(lo, s / ad[k]);
        }
    }
}

std::vector<Vector> directions(Eigen::Index n) {
    std::vector<Vector> dirs;
    for (Eigen::Index i = 0; i < n; ++i) {
        Vector d = Vector::Zero(n);
        d[i] = 1.0;
        dirs.push_back(d);
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
            Vector d = Vector::Zero(n);
            d[i] = 1.0;
            d[j] = -1.0;
            dirs.push_back(d);
        }
    }
    return dirs;
}

void refine_min_variance(const Polytope& poly, const Matrix& cov, Vector& x, int sweeps) {
    const auto dirs = directions(x.size());
    for (int sweep = 0; sweep < sweeps; ++sweep) {
        const double before = x.dot(cov * x);
        for (const Vector& d : dirs) {
            double lo, hi;
            linear_interval(poly, x, d, lo, hi);
            if (!(hi > lo)) {
                continue;
            }
            const double curv = d.dot(cov * d);
            const double slope = d.dot(cov * x);
            double t;
            if (curv > 1e-18) {
                t = std::clamp(-slope / curv, lo, hi);
            } else {
                t = slope > 0.0 ? lo : hi;
            }
            if (std::isfinite(t) && t != 0.0) {
                x += t * d;
            }
        }
        if (before - x.dot(cov * x) <= 1e-16 * (1.0 + before)) {
            break;
        }
    }
}

void refine_max_return(const Polytope& poly, const Matrix& cov, const Vector& r, double v_t, Vector& x, int sweeps) {
    const auto dirs = directions(x.size());
    for (int sweep = 0; sweep < sweeps; ++sweep) {
        const double before = r.dot(x);
        for (const Vector& d : dirs) {
            const double gain = r.dot(d);
            if (gain == 0.0) {
                continue;
            }
            double lo, hi;
            linear_interval(poly, x, d, lo, hi);
            const double a = d.dot(cov * d);
            const double b = d.dot(cov * x);
            const double c = std::min(x.dot(cov * x) - v_t, 0.0);
            if (a > 1e-18) {
                const double disc = std::sqrt(std::max(0.0, b * b - a * c));
                lo = std::max(lo, (-b - disc) / a);
                hi = std::min(hi, (-b + disc) / a);
            } else if (b > 0.0) {
                hi = std::min(hi, -c / (2.0 * b));
            } else if (b < 0.0) {
                lo = std::max(lo, -c / (2.0 * b));
            }
            if (!(hi >= lo)) {
                continue;
            }
            const double t = gain > 0.0 ? hi : lo;
            if (std::isfinite(t) && t * gain > 0.0) {
                const Vector trial = x + t * d;
                if (inside(poly, trial, 1e-12) && trial.dot(cov * trial) <= v_t * (1.0 + 1e-12)) {
                    x = trial;
                }
            }
        }
        if (r.dot(x) - before <= 1e-16 * (1.0 + std::abs(before))) {
            break;
        }
    }
}

// Calls visit(rows) for every subset of {0..w-1} with size in [0, max_size].
void for_each_subset(int w, int max_size, const std::function<void(const std::vector<int>&)>& visit) {
    std::vector<int> subset;
    std::function<void(int)> rec = [&](int start) {
        visit(subset);
        if (static_cast<int>(subset.size()) == max_size) {
            return;
        }
        for (int k = start; k < w; ++k) {
            subset.push_back(k);
            rec(k + 1);
            subset.pop_back();
        }
    };
    rec(0);
}

// Solves [H A_S'; A_S 0] [x; nu] = [top; bottom]; false when singular.
bool kkt_solve(const Matrix& H, const Polytope& poly, const std::vector<int>& rows, const Vector& top,
               const Vector& bottom, Vector& x) {
    const Eigen::Index n = H.rows();
    const auto k = static_cast<Eigen::Index>(rows.size());
    Matrix kkt = Matrix::Zero(n + k, n + k);
    kkt.topLeftCorner(n, n) = H;
    for (Eigen::Index r = 0; r < k; ++r) {
        kkt.block(n + r, 0, 1, n) = poly.A.row(rows[static_cast<std::size_t>(r)]);
        kkt.block(0, n + r, n, 1) = poly.A.row(rows[static_cast<std::size_t>(r)]).transpose();
    }
    Eigen::FullPivLU<Matrix> lu(kkt);
    lu.setThreshold(1e-10);
    if (lu.rank() < n + k) {
        return false;
    }
    Vector rhs(n + k);
    rhs.head(n) = top;
    rhs.tail(k) = bottom;
    x = lu.solve(rhs).head(n);
    return x.allFinite();
}

Vector subset_rhs(const Polytope& poly, const std::vector<int>& rows) {
    Vector b(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        b[static_cast<Eigen::Index>(r)] = poly.b[rows[r]];
    }
    return b;
}

}  // namespace

OracleResult brute_force_oracle(const EfProblem& problem, std::size_t samples) {
    OracleOptions options;
    options.samples = samples;
    return brute_force_oracle(problem, options);
}

OracleResult brute_force_oracle(const EfProblem& p, const OracleOptions& options) {
    const auto n = static_cast<Eigen::Index>(p.size());
    const Polytope poly = make_polytope(p);
    const Matrix cov = p.vols.asDiagonal() * p.corr * p.vols.asDiagonal();
    const double v_t = p.v_target * p.v_target;
    const double tol = options.feasibility_tolerance;
    auto variance = [&](const Vector& x) { return x.dot(cov * x); };

    OracleResult result;
    bool have_min = false;
    Vector best_min;
    double best_var = std::numeric_limits<double>::infinity();
    auto offer_min = [&](const Vector& x) {
        const double v = variance(x);
        if (v < best_var) {
            best_var = v;
            best_min = x;
            have_min = true;
        }
    };

    // Samples are kept (as long as they fit) for the second stage.
    std::mt19937_64 rng(options.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<Vector> accepted;
    Vector x(n);
    for (std::size_t s = 0; s < options.samples; ++s) {
        if (s % 2 == 0) {
            const double total = p.alpha_min + (p.alpha_max - p.alpha_min) * unit(rng);
            double sum = 0.0;
            for (Eigen::Index i = 0; i < n; ++i) {
                x[i] = -std::log(1.0 - unit(rng));
                sum += x[i];
            }
            x *= total / sum;
        } else {
            for (Eigen::Index i = 0; i < n; ++i) {
                x[i] = p.x_min[i] + (p.x_max[i] - p.x_min[i]) * unit(rng);
            }
        }
        if (inside(poly, x, tol)) {
            ++result.accepted_samples;
            offer_min(x);
            accepted.push_back(x);
        }
    }
    // Thin feasible sets reject most independent draws; top the sample count
    // up with a walk that stays inside.
    if (!accepted.empty() && result.accepted_samples < options.samples) {
        hit_and_run(poly, p, accepted.back(), 2 * (options.samples - result.accepted_samples), tol, rng,
                    [&](const Vector& y) {
                        if (result.accepted_samples < options.samples) {
                            ++result.accepted_samples;
                            offer_min(y);
                            accepted.push_back(y);
                        }
                    });
    }
    if (have_min) {
        Vector refined = best_min;
        refine_min_variance(poly, cov, refined, options.refinement_sweeps);
        if (inside(poly, refined, tol)) {
            offer_min(refined);
        }
    }

    const bool enumerate = p.size() <= options.max_enumeration_assets;
    const int w = static_cast<int>(poly.A.rows());
    const Vector zero = Vector::Zero(n);
    if (enumerate) {
        for_each_subset(w, static_cast<int>(n), [&](const std::vector<int>& rows) {
            Vector cand;
            if (kkt_solve(cov, poly, rows, zero, subset_rhs(poly, rows), cand) && inside(poly, cand, tol)) {
                ++result.candidates;
                offer_min(cand);
            }
        });
    }

    result.v_min = best_var;
    if (!have_min) {
        result.objective = std::numeric_limits<double>::quiet_NaN();
        return result;
    }
    if (!(best_var < v_t)) {
        result.branch = Branch::MinVariance;
        result.objective = best_var;
        result.allocation = make_allocation(p, best_min);
        return result;
    }

    result.branch = Branch::MaxReturn;
    Vector best = best_min;
    double best_ret = p.returns.dot(best_min);
    auto offer_max = [&](const Vector& cand) {
        const double r = p.returns.dot(cand);
        if (r > best_ret && variance(cand) <= v_t * (1.0 + tol)) {
            best_ret = r;
            best = cand;
        }
    };
    for (const Vector& a : accepted) {
        offer_max(a);
    }
    {
        Vector refined = best;
        refine_max_return(poly, cov, p.returns, v_t, refined, options.refinement_sweeps);
        if (inside(poly, refined, tol)) {
            offer_max(refined);
        }
    }
    if (enumerate) {
        const Matrix zero_h = Matrix::Zero(n, n);
        for_each_subset(w, static_cast<int>(n), [&](const std::vector<int>& rows) {
            const Vector b = subset_rhs(poly, rows);
            Vector cand;
            if (static_cast<Eigen::Index>(rows.size()) == n) {
                // Vertex of the linear polytope.
                if (kkt_solve(zero_h, poly, rows, zero, b, cand) && inside(poly, cand, tol)) {
                    ++result.candidates;
                    offer_max(cand);
                }
                return;
            }
            // Stationary points with the cone active: x = x0 + t x1, t > 0.
            Vector x0, x1;
            if (!kkt_solve(cov, poly, rows, zero, b, x0) ||
                !kkt_solve(cov, poly, rows, p.returns, Vector::Zero(b.size()), x1)) {
                return;
            }
            const double qa = variance(x1);
            const double qb = x0.dot(cov * x1);
            const double qc = variance(x0) - v_t;
            std::vector<double> roots;
            if (qa > 1e-300) {
                const double disc = qb * qb - qa * qc;
                if (disc >= 0.0) {
                    roots.push_back((-qb + std::sqrt(disc)) / qa);
                    roots.push_back((-qb - std::sqrt(disc)) / qa);
                }
            }
            for (double t : roots) {
                if (t > 0.0) {
                    cand = x0 + t * x1;
                    if (inside(poly, cand, tol)) {
                        ++result.candidates;
                        offer_max(cand);
                    }
                }
            }
        });
    }
    result.objective = best_ret;
    result.allocation = make_allocation(p, best);
    return result;
}

}  // namespace frontier
