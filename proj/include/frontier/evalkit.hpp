#pragma once

#include "frontier/problem.hpp"
#include "frontier/record_io.hpp"

#include <json.hpp>

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace frontier {

using AllocationFn = std::function<Allocation(const EfProblem&)>;

struct WeightErrors {
    double mse = 0.0;
    double mae = 0.0;
    double sum_abs = 0.0;  // per-sample sum of absolute errors
};

/// Throws std::invalid_argument on length mismatch.
WeightErrors weight_errors(const Vector& pred, const Vector& truth);

/// True when pred and truth induce the same descending order after merging:
/// entries below tol count as zero, and differences within tol are ties.
bool same_ranking(const Vector& pred, const Vector& truth, double tol);

/// Percentage of samples with the same_ranking order.
double ranking_precision(std::span<const Vector> preds, std::span<const Vector> truths, double tol);

struct ConstraintCheck {
    bool zeta_ok = true;
    bool vol_ok = true;
};

/// zeta_ok: every class sum <= zeta + 1e-8. vol_ok: scaled variance <=
/// max(v_t, v_min * scale) + 1e-8 * scale, with `v_min` the unscaled
/// minimum variance from the exact solver.
ConstraintCheck constraint_precisions(const Vector& pred, const EfProblem& problem, double v_min,
                                      double scale = kDefaultVarianceScale);

/// Exact nearest-rank quantile (full sort): the ceil(q * N)-th smallest value.
double exact_quantile(std::vector<double> values, double q);

struct EvalOptions {
    double ranking_tol = 1e-4;
    std::vector<double> quantile_levels{0.95, 0.99865, 0.99997};
    std::size_t min_quantile_samples = 30000;
    std::size_t cdf_points = 101;
    double scale = kDefaultVarianceScale;
    unsigned threads = 1;
};

struct BucketReport {
    std::size_t assets = 0;  // 0 for the all-sample bucket
    std::size_t samples = 0;
    double weight_mse = 0.0;
    double weight_mae = 0.0;
    double return_mse = 0.0;
    double return_mae = 0.0;
    double vol_mse = 0.0;
    double vol_mae = 0.0;
    std::vector<double> quantiles;  // of per-sample weight sum-error
    double ranking_precision = 100.0;
    double zeta_precision = 100.0;
    double vol_precision = 100.0;
    std::vector<double> error_cdf;  // sum-error at evenly spaced probabilities
    bool undersized = false;        // too few samples for the extreme quantiles
};

struct EvalReport {
    std::vector<double> quantile_levels;
    std::vector<BucketReport> buckets;  // ascending asset count
    BucketReport overall;
    std::vector<std::string> warnings;
};

/// Scores `f` against labelled records. Records without a label throw
/// std::invalid_argument. Deterministic for any thread count.
EvalReport evaluate(std::span<const DatasetRecord> records, const AllocationFn& f, const EvalOptions& options = {});

nlohmann::ordered_json report_to_json(const EvalReport& report);

/// Scalar addressed by a path such as "returns[3]", "corr[0][1]", "zeta_max[1]"
/// or "v_target". Throws std::invalid_argument on a bad path.
double get_param(const EfProblem& problem, const std::string& path);
/// Correlation entries are set symmetrically.
void set_param(EfProblem& problem, const std::string& path, double value);

struct SweepRow {
    double value = 0.0;
    Vector weights;
    double achieved_return = 0.0;
    double achieved_vol = 0.0;
    bool jump = false;  // some weight moved by more than the threshold since the previous row
};

struct SweepTable {
    std::string param;
    std::vector<SweepRow> rows;
    std::size_t jumps = 0;
};

/// Evaluates f on `steps` evenly spaced values of `param` in [lo, hi].
SweepTable sweep(const EfProblem& problem, const std::string& param, double lo, double hi, std::size_t steps,
                 const AllocationFn& f, double jump_threshold = 0.1);

/// Header: value, w0..w{n-1}, return, vol, jump.
std::string sweep_to_csv(const SweepTable& table);

}  // namespace frontier
