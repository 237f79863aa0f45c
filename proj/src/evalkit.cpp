#include "frontier/evalkit.hpp"

#include "frontier/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <regex>
#include <sstream>
#include <stdexcept>

namespace frontier {

namespace {

// Sub-tolerance entries become zero; the rest are compared pairwise.
int tol_sign(double d, double tol) {
    if (std::abs(d) <= tol) {
        return 0;
    }
    return d > 0.0 ? 1 : -1;
}

struct SampleScore {
    std::size_t assets = 0;
    WeightErrors weights;
    double return_error = 0.0;
    double vol_error = 0.0;
    bool ranked = true;
    ConstraintCheck constraints;
};

BucketReport summarize(std::size_t assets, const std::vector<const SampleScore*>& scores, const EvalOptions& o) {
    BucketReport b;
    b.assets = assets;
    b.samples = scores.size();
    if (scores.empty()) {
        return b;
    }
    std::vector<double> sums;
    sums.reserve(scores.size());
    double weight_count = 0.0, sq = 0.0, ab = 0.0;
    std::size_t ranked = 0, zeta = 0, vol = 0;
    for (const SampleScore* s : scores) {
        const auto n = static_cast<double>(s->assets);
        sq += s->weights.mse * n;
        ab += s->weights.mae * n;
        weight_count += n;
        b.return_mse += s->return_error * s->return_error;
        b.return_mae += std::abs(s->return_error);
        b.vol_mse += s->vol_error * s->vol_error;
        b.vol_mae += std::abs(s->vol_error);
        ranked += s->ranked;
        zeta += s->constraints.zeta_ok;
        vol += s->constraints.vol_ok;
        sums.push_back(s->weights.sum_abs);
    }
    const auto count = static_cast<double>(scores.size());
    b.weight_mse = sq / weight_count;
    b.weight_mae = ab / weight_count;
    b.return_mse /= count;
    b.return_mae /= count;
    b.vol_mse /= count;
    b.vol_mae /= count;
    b.ranking_precision = 100.0 * static_cast<double>(ranked) / count;
    b.zeta_precision = 100.0 * static_cast<double>(zeta) / count;
    b.vol_precision = 100.0 * static_cast<double>(vol) / count;
    std::sort(sums.begin(), sums.end());
    for (double q : o.quantile_levels) {
        b.quantiles.push_back(exact_quantile(sums, q));
    }
    if (o.cdf_points >= 2) {
        for (std::size_t k = 0; k < o.cdf_points; ++k) {
            b.error_cdf.push_back(
                exact_quantile(sums, static_cast<double>(k) / static_cast<double>(o.cdf_points - 1)));
        }
    }
    b.undersized = scores.size() < o.min_quantile_samples;
    return b;
}

nlohmann::ordered_json bucket_json(const BucketReport& b, const std::vector<double>& levels) {
    nlohmann::ordered_json j;
    j["assets"] = b.assets;
    j["samples"] = b.samples;
    j["weight"] = {{"mse", b.weight_mse}, {"mae", b.weight_mae}};
    j["return"] = {{"mse", b.return_mse}, {"mae", b.return_mae}};
    j["vol"] = {{"mse", b.vol_mse}, {"mae", b.vol_mae}};
    nlohmann::ordered_json q = nlohmann::ordered_json::object();
    for (std::size_t i = 0; i < b.quantiles.size() && i < levels.size(); ++i) {
        char key[32];
        std::snprintf(key, sizeof(key), "%g", 100.0 * levels[i]);
        q[key] = b.quantiles[i];
    }
    j["sum_error_quantiles"] = q;
    j["ranking_precision"] = b.ranking_precision;
    j["zeta_precision"] = b.zeta_precision;
    j["vol_precision"] = b.vol_precision;
    j["error_cdf"] = b.error_cdf;
    j["undersized"] = b.undersized;
    return j;
}

struct ParamRef {
    std::string field;
    long i = -1;
    long j = -1;
};

ParamRef parse_path(const std::string& path) {
    static const std::regex re(R"(^([a-z_]+)(?:\[(\d+)\])?(?:\[(\d+)\])?$)");
    std::smatch m;
    if (!std::regex_match(path, m, re)) {
        throw std::invalid_argument("bad parameter path '" + path + "'");
    }
    ParamRef r;
    r.field = m[1];
    if (m[2].matched) {
        r.i = std::stol(m[2]);
    }
    if (m[3].matched) {
        r.j = std::stol(m[3]);
    }
    return r;
}

double& vector_entry(Vector& v, const ParamRef& r, const std::string& path) {
    if (r.i < 0 || r.j >= 0 || r.i >= v.size()) {
        throw std::invalid_argument("parameter path '" + path + "' needs one index in range");
    }
    return v[r.i];
}

}  // namespace

WeightErrors weight_errors(const Vector& pred, const Vector& truth) {
    if (pred.size() != truth.size()) {
        throw std::invalid_argument("weight_errors: length mismatch");
    }
    WeightErrors e;
    if (pred.size() == 0) {
        return e;
    }
    const Vector d = pred - truth;
    const auto n = static_cast<double>(d.size());
    e.mse = d.squaredNorm() / n;
    e.sum_abs = d.cwiseAbs().sum();
    e.mae = e.sum_abs / n;
    return e;
}

bool same_ranking(const Vector& pred, const Vector& truth, double tol) {
    if (pred.size() != truth.size()) {
        throw std::invalid_argument("same_ranking: length mismatch");
    }
    auto merged = [tol](const Vector& v) {
        return Vector(v.unaryExpr([tol](double x) { return std::abs(x) < tol ? 0.0 : x; }));
    };
    const Vector p = merged(pred);
    const Vector t = merged(truth);
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        for (Eigen::Index j = i + 1; j < p.size(); ++j) {
            if (tol_sign(p[i] - p[j], tol) != tol_sign(t[i] - t[j], tol)) {
                return false;
            }
        }
    }
    return true;
}

double ranking_precision(std::span<const Vector> preds, std::span<const Vector> truths, double tol) {
    if (preds.size() != truths.size()) {
        throw std::invalid_argument("ranking_precision: sample count mismatch");
    }
    if (preds.empty()) {
        return 100.0;
    }
    std::size_t ok = 0;
    for (std::size_t k = 0; k < preds.size(); ++k) {
        ok += same_ranking(preds[k], truths[k], tol);
    }
    return 100.0 * static_cast<double>(ok) / static_cast<double>(preds.size());
}

ConstraintCheck constraint_precisions(const Vector& pred, const EfProblem& problem, double v_min, double scale) {
    ConstraintCheck c;
    const Vector sums = class_sums(problem, pred);
    for (Eigen::Index k = 0; k < sums.size(); ++k) {
        if (sums[k] > problem.zeta_max[k] + 1e-8) {
            c.zeta_ok = false;
        }
    }
    const double var = portfolio_variance(problem, pred) * scale;
    const double v_t = problem.v_target * problem.v_target * scale;
    c.vol_ok = var <= std::max(v_t, v_min * scale) + 1e-8 * scale;
    return c;
}

double exact_quantile(std::vector<double> values, double q) {
    if (values.empty()) {
        throw std::invalid_argument("exact_quantile: no values");
    }
    if (q < 0.0 || q > 1.0) {
        throw std::invalid_argument("exact_quantile: level outside [0, 1]");
    }
    std::sort(values.begin(), values.end());
    const auto n = static_cast<double>(values.size());
    const auto rank = static_cast<std::size_t>(std::ceil(q * n));
    return values[rank == 0 ? 0 : std::min(rank, values.size()) - 1];
}

EvalReport evaluate(std::span<const DatasetRecord> records, const AllocationFn& f, const EvalOptions& o) {
    std::vector<SampleScore> scores(records.size());
    parallel_for(records.size(), o.threads, [&](std::size_t k) {
        const DatasetRecord& rec = records[k];
        if (!rec.label) {
            throw std::invalid_argument("evaluate: record " + std::to_string(k) + " has no label");
        }
        const Allocation truth = make_allocation(rec.problem, rec.label->x);
        const Allocation pred = f(rec.problem);
        SampleScore& s = scores[k];
        s.assets = rec.problem.size();
        s.weights = weight_errors(pred.x, truth.x);
        s.return_error = pred.achieved_return - truth.achieved_return;
        s.vol_error = pred.achieved_vol - truth.achieved_vol;
        s.ranked = same_ranking(pred.x, truth.x, o.ranking_tol);
        s.constraints = constraint_precisions(pred.x, rec.problem, rec.label->v_min, o.scale);
    });

    EvalReport report;
    report.quantile_levels = o.quantile_levels;
    std::map<std::size_t, std::vector<const SampleScore*>> by_assets;
    std::vector<const SampleScore*> all;
    for (const auto& s : scores) {
        by_assets[s.assets].push_back(&s);
        all.push_back(&s);
    }
    for (const auto& [assets, group] : by_assets) {
        report.buckets.push_back(summarize(assets, group, o));
        if (report.buckets.back().undersized) {
            report.warnings.push_back(std::to_string(assets) + "-asset bucket has " + std::to_string(group.size()) +
                                      " samples; extreme quantiles need at least " +
                                      std::to_string(o.min_quantile_samples));
        }
    }
    report.overall = summarize(0, all, o);
    return report;
}

nlohmann::ordered_json report_to_json(const EvalReport& r) {
    nlohmann::ordered_json j;
    j["quantile_levels"] = r.quantile_levels;
    j["overall"] = bucket_json(r.overall, r.quantile_levels);
    auto& buckets = j["buckets"] = nlohmann::ordered_json::array();
    for (const auto& b : r.buckets) {
        buckets.push_back(bucket_json(b, r.quantile_levels));
    }
    j["warnings"] = r.warnings;
    return j;
}

double get_param(const EfProblem& problem, const std::string& path) {
    EfProblem copy = problem;
    const ParamRef r = parse_path(path);
    if (r.field == "corr") {
        if (r.i < 0 || r.j < 0 || r.i >= copy.corr.rows() || r.j >= copy.corr.cols()) {
            throw std::invalid_argument("parameter path '" + path + "' needs two indices in range");
        }
        return copy.corr(r.i, r.j);
    }
    if (r.field == "returns") return vector_entry(copy.returns, r, path);
    if (r.field == "vols") return vector_entry(copy.vols, r, path);
    if (r.field == "x_min") return vector_entry(copy.x_min, r, path);
    if (r.field == "x_max") return vector_entry(copy.x_max, r, path);
    if (r.field == "zeta_max") return vector_entry(copy.zeta_max, r, path);
    if (r.i >= 0) {
        throw std::invalid_argument("parameter path '" + path + "' takes no index");
    }
    if (r.field == "alpha_min") return problem.alpha_min;
    if (r.field == "alpha_max") return problem.alpha_max;
    if (r.field == "v_target") return problem.v_target;
    throw std::invalid_argument("unknown parameter '" + r.field + "'");
}

void set_param(EfProblem& problem, const std::string& path, double value) {
    const ParamRef r = parse_path(path);
    if (r.field == "corr") {
        if (r.i < 0 || r.j < 0 || r.i >= problem.corr.rows() || r.j >= problem.corr.cols()) {
            throw std::invalid_argument("parameter path '" + path + "' needs two indices in range");
        }
        problem.corr(r.i, r.j) = value;
        problem.corr(r.j, r.i) = value;
        return;
    }
    if (r.field == "returns") { vector_entry(problem.returns, r, path) = value; return; }
    if (r.field == "vols") { vector_entry(problem.vols, r, path) = value; return; }
    if (r.field == "x_min") { vector_entry(problem.x_min, r, path) = value; return; }
    if (r.field == "x_max") { vector_entry(problem.x_max, r, path) = value; return; }
    if (r.field == "zeta_max") { vector_entry(problem.zeta_max, r, path) = value; return; }
    if (r.i >= 0) {
        throw std::invalid_argument("parameter path '" + path + "' takes no index");
    }
    if (r.field == "alpha_min") { problem.alpha_min = value; return; }
    if (r.field == "alpha_max") { problem.alpha_max = value; return; }
    if (r.field == "v_target") { problem.v_target = value; return; }
    throw std::invalid_argument("unknown parameter '" + r.field + "'");
}

SweepTable sweep(const EfProblem& problem, const std::string& param, double lo, double hi, std::size_t steps,
                 const AllocationFn& f, double jump_threshold) {
    if (steps < 2) {
        throw std::invalid_argument("sweep: need at least two grid points");
    }
    get_param(problem, param);  // validates the path up front
    SweepTable t;
    t.param = param;
    for (std::size_t k = 0; k < steps; ++k) {
        const double value = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(steps - 1);
        EfProblem p = problem;
        set_param(p, param, value);
        const Allocation a = f(p);
        SweepRow row{value, a.x, a.achieved_return, a.achieved_vol, false};
        if (!t.rows.empty()) {
            const Vector& prev = t.rows.back().weights;
            row.jump = prev.size() == row.weights.size() &&
                       (row.weights - prev).cwiseAbs().maxCoeff() > jump_threshold;
            t.jumps += row.jump;
        }
        t.rows.push_back(std::move(row));
    }
    return t;
}

std::string sweep_to_csv(const SweepTable& t) {
    std::ostringstream out;
    out.precision(17);
    const Eigen::Index n = t.rows.empty() ? 0 : t.rows.front().weights.size();
    out << "value";
    for (Eigen::Index i = 0; i < n; ++i) {
        out << ",w" << i;
    }
    out << ",return,vol,jump\n";
    for (const auto& r : t.rows) {
        out << r.value;
        for (Eigen::Index i = 0; i < r.weights.size(); ++i) {
            out << ',' << r.weights[i];
        }
        out << ',' << r.achieved_return << ',' << r.achieved_vol << ',' << (r.jump ? 1 : 0) << '\n';
    }
    return out.str();
}

}  // namespace frontier
