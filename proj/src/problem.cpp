#include "frontier/problem.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace frontier {

namespace {

void check_length(ValidationReport& report, const char* field, Eigen::Index actual, std::size_t n) {
    if (static_cast<std::size_t>(actual) != n) {
        report.violations.push_back({field, "length differs from asset count", static_cast<double>(actual)});
    }
}

bool all_finite(const Eigen::Ref<const Matrix>& m) { return m.allFinite(); }

}  // namespace

std::string ValidationReport::summary() const {
    std::ostringstream out;
    for (const auto& v : violations) {
        out << v.field << ": " << v.violation << " (measured " << v.measured << ")\n";
    }
    return out.str();
}

ValidationReport validate(const EfProblem& p) {
    ValidationReport report;
    const std::size_t n = p.size();
    if (n == 0) {
        report.violations.push_back({"returns", "no assets", 0.0});
        return report;
    }

    check_length(report, "vols", p.vols.size(), n);
    check_length(report, "x_min", p.x_min.size(), n);
    check_length(report, "x_max", p.x_max.size(), n);
    if (static_cast<std::size_t>(p.corr.rows()) != n || static_cast<std::size_t>(p.corr.cols()) != n) {
        report.violations.push_back({"corr", "not an n x n matrix", static_cast<double>(p.corr.rows())});
    }
    if (p.has_classes()) {
        check_length(report, "classes", static_cast<Eigen::Index>(p.classes.size()), n);
    }
    if (!report.ok()) {
        return report;
    }

    if (!all_finite(p.returns) || !all_finite(p.vols) || !all_finite(p.corr) || !all_finite(p.x_min) ||
        !all_finite(p.x_max) || !all_finite(p.zeta_max) || !std::isfinite(p.alpha_min) ||
        !std::isfinite(p.alpha_max) || !std::isfinite(p.v_target)) {
        report.violations.push_back({"problem", "non-finite value", NAN});
        return report;
    }

    for (std::size_t i = 0; i < n; ++i) {
        if (p.vols[i] < 0.0) {
            report.violations.push_back({"vols[" + std::to_string(i) + "]", "negative volatility", p.vols[i]});
        }
        if (p.x_min[i] < 0.0) {
            report.violations.push_back({"x_min[" + std::to_string(i) + "]", "below 0", p.x_min[i]});
        }
        if (p.x_max[i] > 1.0) {
            report.violations.push_back({"x_max[" + std::to_string(i) + "]", "above 1", p.x_max[i]});
        }
        if (p.x_min[i] > p.x_max[i]) {
            report.violations.push_back(
                {"x_min[" + std::to_string(i) + "]", "bound ordering x_min > x_max", p.x_min[i] - p.x_max[i]});
        }
    }

    constexpr double kSymTol = 1e-12;
    for (std::size_t i = 0; i < n; ++i) {
        if (std::abs(p.corr(i, i) - 1.0) > kSymTol) {
            report.violations.push_back({"corr[" + std::to_string(i) + "][" + std::to_string(i) + "]",
                                         "diagonal entry is not 1", p.corr(i, i)});
        }
        for (std::size_t j = 0; j < n; ++j) {
            const double v = p.corr(i, j);
            const std::string name = "corr[" + std::to_string(i) + "][" + std::to_string(j) + "]";
            if (v < -1.0 || v > 1.0) {
                report.violations.push_back({name, "correlation outside [-1, 1]", v});
            }
            if (j > i && std::abs(v - p.corr(j, i)) > kSymTol) {
                report.violations.push_back({name, "correlation matrix not symmetric", v - p.corr(j, i)});
            }
        }
    }
    const Matrix sym = 0.5 * (p.corr + p.corr.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> eig(sym, Eigen::EigenvaluesOnly);
    const double min_eig = eig.eigenvalues().minCoeff();
    if (min_eig < -kPsdTolerance) {
        report.violations.push_back({"corr", "not positive semidefinite", min_eig});
    }

    if (p.alpha_min < 0.0) {
        report.violations.push_back({"alpha_min", "below 0", p.alpha_min});
    }
    if (p.alpha_min > p.alpha_max) {
        report.violations.push_back({"alpha_min", "alpha_min > alpha_max", p.alpha_min - p.alpha_max});
    }
    if (p.v_target < 0.0) {
        report.violations.push_back({"v_target", "negative volatility target", p.v_target});
    }

    if (p.has_classes()) {
        const int m = static_cast<int>(p.class_count());
        for (std::size_t i = 0; i < n; ++i) {
            const int c = p.classes[i];
            if (c < 0 || c >= m) {
                report.violations.push_back(
                    {"classes[" + std::to_string(i) + "]", "class id does not index zeta_max", static_cast<double>(c)});
            }
        }
        for (int j = 0; j < m; ++j) {
            if (p.zeta_max[j] < 0.0) {
                report.violations.push_back({"zeta_max[" + std::to_string(j) + "]", "negative class cap", p.zeta_max[j]});
            }
        }
    }
    return report;
}

Matrix covariance(const Vector& vols, const Matrix& corr, double scale) {
    if (corr.rows() != vols.size() || corr.cols() != vols.size()) {
        throw std::invalid_argument("covariance: vols and corr dimensions differ");
    }
    Matrix q = scale * (vols.asDiagonal() * corr * vols.asDiagonal());
    return 0.5 * (q + q.transpose());
}

double portfolio_variance(const EfProblem& problem, const Vector& x) {
    const Vector vx = problem.vols.cwiseProduct(x);
    return vx.dot(problem.corr * vx);
}

Vector class_sums(const EfProblem& problem, const Vector& x) {
    Vector sums = Vector::Zero(static_cast<Eigen::Index>(problem.class_count()));
    if (!problem.has_classes()) {
        return sums;
    }
    for (std::size_t i = 0; i < problem.size(); ++i) {
        sums[problem.classes[i]] += x[i];
    }
    return sums;
}

Allocation make_allocation(const EfProblem& problem, Vector x) {
    Allocation a;
    a.achieved_return = problem.returns.dot(x);
    a.achieved_vol = std::sqrt(std::max(0.0, portfolio_variance(problem, x)));
    a.x = std::move(x);
    return a;
}

}  // namespace frontier
