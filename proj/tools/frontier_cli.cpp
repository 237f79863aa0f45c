#include "frontier/datagen.hpp"
#include "frontier/dgar.hpp"
#include "frontier/ef_solver.hpp"
#include "frontier/evalkit.hpp"
#include "frontier/record_io.hpp"
#include "frontier/simkit.hpp"
#include "frontier/surrogate.hpp"
#include "frontier/trainer.hpp"
#include "frontier/weights.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>
#include <string>
#include <vector>

using namespace frontier;
using ordered_json = nlohmann::ordered_json;

namespace {

// Stable process exit codes.
enum ExitCode : int {
    kOk = 0,
    kFailure = 1,
    kUsage = 2,
    kInfeasible = 3,
    kNumericalFailure = 4,
    kInputError = 5,
};

class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct SolverFlags {
    SolverOptions options;
    void add(CLI::App* app) {
        app->add_option("--tol", options.ipm_tolerance, "interior-point tolerance")->capture_default_str();
        app->add_option("--kkt-tol", options.kkt_tolerance, "KKT residual accepted as optimal")
            ->capture_default_str();
        app->add_option("--scale", options.scale, "variance scale factor")->capture_default_str();
        app->add_option("--max-iter", options.max_iterations, "interior-point iteration cap")->capture_default_str();
    }
    ordered_json json() const {
        return {{"ipm_tolerance", options.ipm_tolerance},
                {"kkt_tolerance", options.kkt_tolerance},
                {"scale", options.scale},
                {"max_iterations", options.max_iterations},
                {"max_bracket_iterations", options.max_bracket_iterations}};
    }
};

void add_domain_flags(CLI::App* app, DomainSpec& d) {
    app->add_option("--domain-n-min", d.n_min, "smallest asset count")->capture_default_str();
    app->add_option("--domain-n-max", d.n_max, "largest asset count")->capture_default_str();
    app->add_option("--domain-class-counts", d.class_counts, "class counts to draw from")->delimiter(',');
    app->add_option("--domain-full-prob", d.full_allocation_probability, "probability of full allocation")
        ->capture_default_str();
    app->add_option("--domain-x-min-fraction", d.x_min_fraction, "x_min drawn in [0, f] * x_max")
        ->capture_default_str();
    app->add_option("--domain-disc-prob", d.discontinuity_probability, "probability of an eps-close pair")
        ->capture_default_str();
    app->add_option("--domain-disc-eps", d.discontinuity_eps, "eps as a fraction of the feature range")
        ->capture_default_str();
}

struct ModelFlags {
    std::string config_file;
    EncoderConfig config;
    void add(CLI::App* app) {
        app->add_option("--config", config_file, "encoder config JSON")->check(CLI::ExistingFile);
        app->add_option("--n-max", config.n_max, "maximum asset count")->capture_default_str();
        app->add_option("--token-dim", config.token_dim)->capture_default_str();
        app->add_option("--depth", config.depth)->capture_default_str();
        app->add_option("--heads", config.heads)->capture_default_str();
        app->add_option("--head-dim", config.head_dim)->capture_default_str();
        app->add_option("--ff-dim", config.ff_dim)->capture_default_str();
    }
    EncoderConfig resolve() const {
        if (!config_file.empty()) {
            std::ifstream in(config_file);
            try {
                return config_from_json(nlohmann::json::parse(in));
            } catch (const nlohmann::json::exception& e) {
                throw InputError(config_file + ": " + e.what());
            }
        }
        EncoderConfig c = config;
        c.input_dim = TokenLayout{c.n_max}.feature_width();
        c.validate();
        return c;
    }
};

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot open '" + path + "' for writing");
    }
    out << text;
}

void write_json(const std::string& path, const ordered_json& j) { write_text(path, j.dump(2) + "\n"); }

void emit(const std::string& out, const std::string& text) {
    if (out.empty()) {
        std::cout << text;
    } else {
        write_text(out, text);
    }
}

Vector to_vector(const std::vector<double>& v) {
    return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Matrix parse_matrix(const std::string& text, std::size_t n) {
    // Rows separated by ';', entries by ','.
    std::vector<std::vector<double>> rows;
    std::stringstream rs(text);
    std::string row;
    while (std::getline(rs, row, ';')) {
        std::vector<double> vals;
        std::stringstream es(row);
        std::string cell;
        while (std::getline(es, cell, ',')) {
            try {
                vals.push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw InputError("--corr: bad number '" + cell + "'");
            }
        }
        rows.push_back(std::move(vals));
    }
    if (rows.size() != n) {
        throw InputError("--corr: expected " + std::to_string(n) + " rows");
    }
    Matrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t r = 0; r < n; ++r) {
        if (rows[r].size() != n) {
            throw InputError("--corr: row " + std::to_string(r) + " has the wrong length");
        }
        for (std::size_t c = 0; c < n; ++c) {
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
        }
    }
    return m;
}

struct InlineProblem {
    std::vector<double> returns, vols, x_min, x_max, zeta;
    std::vector<int> classes;
    std::string corr;
    double alpha_min = 1.0, alpha_max = 1.0, v_target = 0.1;

    void add(CLI::App* app) {
        app->add_option("--returns", returns, "expected returns")->delimiter(',');
        app->add_option("--vols", vols, "volatilities")->delimiter(',');
        app->add_option("--corr", corr, "correlation rows, e.g. '1,0.2;0.2,1'");
        app->add_option("--x-min", x_min, "per-asset lower bounds")->delimiter(',');
        app->add_option("--x-max", x_max, "per-asset upper bounds")->delimiter(',');
        app->add_option("--classes", classes, "class of each asset")->delimiter(',');
        app->add_option("--zeta", zeta, "class caps")->delimiter(',');
        app->add_option("--alpha-min", alpha_min)->capture_default_str();
        app->add_option("--alpha-max", alpha_max)->capture_default_str();
        app->add_option("--v-target", v_target)->capture_default_str();
    }

    EfProblem build() const {
        const std::size_t n = returns.size();
        if (n == 0) {
            throw InputError("no problem given: pass --problem or --returns/--vols/--corr");
        }
        EfProblem p;
        p.returns = to_vector(returns);
        p.vols = to_vector(vols);
        p.corr = corr.empty() ? Matrix(Matrix::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n)))
                              : parse_matrix(corr, n);
        p.x_min = x_min.empty() ? Vector::Zero(static_cast<Eigen::Index>(n)) : to_vector(x_min);
        p.x_max = x_max.empty() ? Vector::Ones(static_cast<Eigen::Index>(n)) : to_vector(x_max);
        p.classes = classes;
        p.zeta_max = to_vector(zeta);
        p.alpha_min = alpha_min;
        p.alpha_max = alpha_max;
        p.v_target = v_target;
        return p;
    }
};

void require_valid(const EfProblem& p) {
    const ValidationReport report = validate(p);
    if (!report.ok()) {
        throw InputError("invalid problem: " + report.summary());
    }
}

ordered_json vec_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

// "exact", "uniform", "surrogate" (with --weights) or "surrogate:PATH".
struct Engines {
    std::optional<Model<double>> model;

    AllocationFn make(const std::string& spec, const std::string& weights, const SolverOptions& solver) {
        if (spec == "exact") {
            return [solver](const EfProblem& p) { return solve_ef(p, solver).allocation; };
        }
        if (spec == "uniform") {
            return [](const EfProblem& p) {
                const CanonicalProblem cp = canonicalize(p);
                const DgarConstraints c = dgar_constraints(cp.problem);
                const auto n = static_cast<Eigen::Index>(p.size());
                const Vector flat = Vector::Constant(n, 0.5 * (p.alpha_min + p.alpha_max) / static_cast<double>(n));
                return make_allocation(p, to_original_order(cp, dgar(flat, c)));
            };
        }
        std::string path = weights;
        if (spec.rfind("surrogate:", 0) == 0) {
            path = spec.substr(10);
        } else if (spec != "surrogate") {
            throw InputError("unknown engine '" + spec + "'");
        }
        if (path.empty()) {
            throw InputError("surrogate engine needs --weights or surrogate:PATH");
        }
        model = from_bundle<double>(load_weights(path));
        const Model<double>* m = &*model;
        return [m](const EfProblem& p) { return predict(p, *m); };
    }
};

std::string engine_label(const std::string& spec) {
    return spec.rfind("surrogate", 0) == 0 ? "surrogate" : spec;
}

int run_solve(const std::string& problem_file, const InlineProblem& inline_problem, const SolverFlags& solver,
              const std::string& out) {
    EfProblem p = problem_file.empty() ? inline_problem.build() : read_problem_file(problem_file).problem;
    require_valid(p);
    const SolverResult r = solve_ef(p, solver.options);
    ordered_json j;
    j["status"] = to_string(r.status);
    j["branch"] = to_string(r.branch);
    j["x"] = vec_json(r.allocation.x);
    j["achieved_return"] = r.allocation.achieved_return;
    j["achieved_vol"] = r.allocation.achieved_vol;
    j["v_min"] = r.v_min;
    j["kkt_residual"] = r.kkt_residual;
    j["qp_iterations"] = r.qp_iterations;
    j["socp_iterations"] = r.socp_iterations;
    j["message"] = r.message;
    ordered_json manifest = {{"command", "solve"},
                             {"problem", problem_file.empty() ? ordered_json(problem_to_json(p)) : ordered_json(problem_file)},
                             {"solver", solver.json()}};
    if (out.empty()) {
        j["config"] = manifest;
        std::cout << j.dump(2) << '\n';
    } else {
        write_json(out, j);
        write_json(out + ".manifest.json", manifest);
    }
    switch (r.status) {
        case SolveStatus::Optimal: return kOk;
        case SolveStatus::Infeasible: return kInfeasible;
        case SolveStatus::NumericalFailure: return kNumericalFailure;
    }
    return kFailure;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Efficient-frontier solver, dataset generator and surrogate toolkit"};
    app.require_subcommand(1);
    std::uint64_t seed = 0;
    unsigned threads = 1;
    std::string out;

    // solve
    auto* solve = app.add_subcommand("solve", "solve one problem exactly");
    std::string problem_file;
    InlineProblem inline_problem;
    SolverFlags solve_solver;
    solve->add_option("--problem", problem_file, "problem file (dataset record format)")->check(CLI::ExistingFile);
    inline_problem.add(solve);
    solve_solver.add(solve);
    solve->add_option("--out", out, "write the result here instead of stdout");

    // gen
    auto* gen = app.add_subcommand("gen", "generate a labelled dataset");
    DomainSpec gen_domain;
    GenerateOptions gen_opts;
    SolverFlags gen_solver;
    bool no_label = false;
    gen->add_option("--count", gen_opts.count, "number of records")->capture_default_str();
    gen->add_option("--seed", seed, "random seed")->capture_default_str();
    gen->add_option("--threads", threads, "worker threads")->capture_default_str();
    gen->add_option("--shard-size", gen_opts.shard_size, "records per shard")->capture_default_str();
    gen->add_flag("--no-label", no_label, "skip exact labelling");
    gen->add_option("--out", out, "dataset path")->required();
    add_domain_flags(gen, gen_domain);
    gen_solver.add(gen);

    // train
    auto* trn = app.add_subcommand("train", "train the surrogate");
    std::string data_file;
    ModelFlags train_model;
    TrainOptions train_opts;
    double val_fraction = 0.1;
    bool no_dgar = false;
    trn->add_option("--data", data_file, "labelled dataset")->required()->check(CLI::ExistingFile);
    trn->add_option("--out", out, "weights path")->required();
    trn->add_option("--seed", seed)->capture_default_str();
    trn->add_option("--threads", threads)->capture_default_str();
    trn->add_option("--steps", train_opts.steps)->capture_default_str();
    trn->add_option("--batch", train_opts.batch_size)->capture_default_str();
    trn->add_option("--lr-max", train_opts.lr_max)->capture_default_str();
    trn->add_option("--lr-min", train_opts.lr_min)->capture_default_str();
    trn->add_option("--weight-decay", train_opts.weight_decay)->capture_default_str();
    trn->add_option("--eval-every", train_opts.eval_every, "validation cadence in steps (0 = per epoch)")
        ->capture_default_str();
    trn->add_option("--val-fraction", val_fraction, "held-out tail of the dataset")->capture_default_str();
    trn->add_flag("--no-dgar", no_dgar, "train on raw outputs");
    train_model.add(trn);

    // eval
    auto* ev = app.add_subcommand("eval", "score an engine against dataset labels");
    std::string engine = "exact";
    std::string weights;
    SolverFlags eval_solver;
    EvalOptions eval_opts;
    ev->add_option("--data", data_file)->required()->check(CLI::ExistingFile);
    ev->add_option("--engine", engine, "exact | uniform | surrogate | surrogate:PATH")->capture_default_str();
    ev->add_option("--weights", weights)->check(CLI::ExistingFile);
    ev->add_option("--ranking-tol", eval_opts.ranking_tol)->capture_default_str();
    ev->add_option("--threads", threads)->capture_default_str();
    ev->add_option("--out", out, "report path");
    eval_solver.add(ev);

    // sweep
    auto* sw = app.add_subcommand("sweep", "vary one input and tabulate allocations");
    std::string param;
    double lo = 0.0, hi = 1.0;
    std::size_t steps = 101;
    std::vector<std::string> sweep_engines{"exact"};
    SolverFlags sweep_solver;
    double jump = 0.1;
    sw->add_option("--problem", problem_file)->required()->check(CLI::ExistingFile);
    sw->add_option("--param", param, "e.g. returns[3], corr[0][1], v_target")->required();
    sw->add_option("--lo", lo)->required();
    sw->add_option("--hi", hi)->required();
    sw->add_option("--steps", steps)->capture_default_str();
    sw->add_option("--engine", sweep_engines, "one or more engines")->capture_default_str();
    sw->add_option("--weights", weights)->check(CLI::ExistingFile);
    sw->add_option("--jump", jump, "weight change flagged as a jump")->capture_default_str();
    sw->add_option("--out", out, "output prefix");
    sweep_solver.add(sw);

    // bench
    auto* bn = app.add_subcommand("bench", "throughput benchmark");
    BenchConfig bench_cfg;
    std::vector<std::string> bench_engines{"exact-single", "exact-batch-parallel"};
    SolverFlags bench_solver;
    bn->add_option("--engines", bench_engines)->delimiter(',')->capture_default_str();
    bn->add_option("--batch-sizes", bench_cfg.batch_sizes)->delimiter(',')->capture_default_str();
    bn->add_option("--workers", bench_cfg.workers)->delimiter(',')->capture_default_str();
    bn->add_option("--duration", bench_cfg.duration_seconds)->capture_default_str();
    bn->add_option("--warmup", bench_cfg.warmup_seconds)->capture_default_str();
    bn->add_option("--repeats", bench_cfg.repeats)->capture_default_str();
    bn->add_option("--stream-size", bench_cfg.stream_size)->capture_default_str();
    bn->add_option("--seed", seed)->capture_default_str();
    bn->add_option("--weights", weights)->check(CLI::ExistingFile);
    bn->add_option("--out", out, "CSV path");
    add_domain_flags(bn, bench_cfg.domain);
    bench_solver.add(bn);

    // mc
    auto* mc = app.add_subcommand("mc", "Monte Carlo expectation over random problems");
    std::string g = "return";
    std::size_t n = 1000;
    DomainSpec mc_domain;
    SolverFlags mc_solver;
    mc->add_option("--g", g, "return | vol | weight:I")->capture_default_str();
    mc->add_option("--n", n, "number of draws")->capture_default_str();
    mc->add_option("--seed", seed)->capture_default_str();
    mc->add_option("--threads", threads)->capture_default_str();
    mc->add_option("--out", out, "result path");
    add_domain_flags(mc, mc_domain);
    mc_solver.add(mc);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (solve->parsed()) {
            return run_solve(problem_file, inline_problem, solve_solver, out);
        }

        if (gen->parsed()) {
            gen_opts.seed = seed;
            gen_opts.threads = threads;
            gen_opts.solver = gen_solver.options;
            gen_opts.label = !no_label;
            GeneratedDataset ds = generate(gen_domain, gen_opts);
            ds.manifest["run"] = {{"command", "gen"}, {"out", out}, {"threads", threads}};
            write_generated(ds, out);
            std::cerr << "wrote " << ds.records.size() << " records to " << out << " (drop rate "
                      << ds.manifest["drop_rate"].get<double>() << ")\n";
            return kOk;
        }

        if (trn->parsed()) {
            const EncoderConfig cfg = train_model.resolve();
            const TokenLayout layout = layout_for(cfg);
            const auto records = read_dataset(data_file);
            std::vector<TrainingExample> train_set, val_set;
            const auto n_val = static_cast<std::size_t>(val_fraction * static_cast<double>(records.size()));
            for (std::size_t i = 0; i < records.size(); ++i) {
                if (!records[i].label) {
                    throw InputError(data_file + ": record " + std::to_string(i + 1) + " has no label");
                }
                auto ex = make_example(records[i].problem, records[i].label->x, layout);
                (i + n_val >= records.size() ? val_set : train_set).push_back(std::move(ex));
            }
            train_opts.seed = seed;
            train_opts.threads = threads;
            train_opts.dgar_in_loop = !no_dgar;
            const Model<double> init = init_model<double>(cfg, seed);
            const TrainResult r = train(train_set, init, train_opts, &val_set);
            save_weights(to_bundle(r.model), out);
            std::ostringstream loss;
            loss.precision(17);
            loss << "step,loss,lr\n";
            for (std::size_t s = 0; s < r.loss_history.size(); ++s) {
                loss << s << ',' << r.loss_history[s] << ',' << r.lr_history[s] << '\n';
            }
            write_text(out + ".loss.csv", loss.str());
            ordered_json val = ordered_json::array();
            for (const auto& v : r.validation) {
                val.push_back({{"step", v.step}, {"mae", v.mae}});
            }
            write_json(out + ".manifest.json",
                       {{"command", "train"},
                        {"data", data_file},
                        {"seed", seed},
                        {"threads", threads},
                        {"config", config_to_json(cfg)},
                        {"train",
                         {{"steps", train_opts.steps},
                          {"batch_size", train_opts.batch_size},
                          {"lr_max", train_opts.lr_max},
                          {"lr_min", train_opts.lr_min},
                          {"weight_decay", train_opts.weight_decay},
                          {"dgar_in_loop", train_opts.dgar_in_loop},
                          {"train_examples", train_set.size()},
                          {"validation_examples", val_set.size()}}},
                        {"validation", val}});
            return kOk;
        }

        if (ev->parsed()) {
            const auto records = read_dataset(data_file);
            Engines engines;
            const AllocationFn f = engines.make(engine, weights, eval_solver.options);
            eval_opts.threads = threads;
            eval_opts.scale = eval_solver.options.scale;
            const EvalReport report = evaluate(records, f, eval_opts);
            for (const auto& w : report.warnings) {
                std::cerr << "warning: " << w << '\n';
            }
            emit(out, report_to_json(report).dump(2) + "\n");
            if (!out.empty()) {
                write_json(out + ".manifest.json", {{"command", "eval"},
                                                    {"data", data_file},
                                                    {"engine", engine},
                                                    {"weights", weights},
                                                    {"ranking_tol", eval_opts.ranking_tol},
                                                    {"threads", threads},
                                                    {"solver", eval_solver.json()}});
            }
            return kOk;
        }

        if (sw->parsed()) {
            const EfProblem p = read_problem_file(problem_file).problem;
            require_valid(p);
            ordered_json tables = ordered_json::object();
            for (const auto& spec : sweep_engines) {
                Engines engines;
                const AllocationFn f = engines.make(spec, weights, sweep_solver.options);
                const SweepTable t = sweep(p, param, lo, hi, steps, f, jump);
                const std::string label = engine_label(spec);
                if (out.empty()) {
                    std::cout << "# engine " << label << "\n" << sweep_to_csv(t);
                } else {
                    write_text(out + "." + label + ".csv", sweep_to_csv(t));
                }
                tables[label] = {{"engine", spec}, {"jumps", t.jumps}};
            }
            if (!out.empty()) {
                write_json(out + ".manifest.json", {{"command", "sweep"},
                                                    {"problem", problem_file},
                                                    {"param", param},
                                                    {"lo", lo},
                                                    {"hi", hi},
                                                    {"steps", steps},
                                                    {"jump_threshold", jump},
                                                    {"solver", sweep_solver.json()},
                                                    {"tables", tables}});
            }
            return kOk;
        }

        if (bn->parsed()) {
            bench_cfg.engines.clear();
            for (const auto& e : bench_engines) {
                bench_cfg.engines.push_back(engine_from_string(e));
            }
            bench_cfg.seed = seed;
            bench_cfg.solver = bench_solver.options;
            std::optional<Model<float>> model;
            if (!weights.empty()) {
                model = from_bundle<float>(load_weights(weights));
                bench_cfg.model = &*model;
            }
            const BenchResult r = bench(bench_cfg);
            emit(out, bench_to_csv(r));
            if (!out.empty()) {
                write_json(out + ".manifest.json",
                           {{"command", "bench"},
                            {"engines", bench_engines},
                            {"batch_sizes", bench_cfg.batch_sizes},
                            {"workers", bench_cfg.workers},
                            {"duration_seconds", bench_cfg.duration_seconds},
                            {"warmup_seconds", bench_cfg.warmup_seconds},
                            {"repeats", bench_cfg.repeats},
                            {"seed", seed},
                            {"stream_size", bench_cfg.stream_size},
                            {"weights", weights},
                            {"surrogate_batch_cap", r.surrogate_batch_cap},
                            {"hardware_threads", std::thread::hardware_concurrency()},
                            {"domain", domain_to_json(bench_cfg.domain)},
                            {"solver", bench_solver.json()}});
            }
            return kOk;
        }

        if (mc->parsed()) {
            mc_domain.validate();
            std::function<double(const SolverResult&, const EfProblem&)> metric;
            if (g == "return") {
                metric = [](const SolverResult& r, const EfProblem&) { return r.allocation.achieved_return; };
            } else if (g == "vol") {
                metric = [](const SolverResult& r, const EfProblem&) { return r.allocation.achieved_vol; };
            } else if (g.rfind("weight:", 0) == 0) {
                const long i = std::stol(g.substr(7));
                metric = [i](const SolverResult& r, const EfProblem&) {
                    return i < r.allocation.x.size() ? r.allocation.x[i] : 0.0;
                };
            } else {
                throw InputError("unknown g '" + g + "'");
            }
            const SolverOptions so = mc_solver.options;
            const McResult r = estimate_expectation(
                [&](std::mt19937_64& rng) { return sample_problem(rng, mc_domain); },
                [&](const EfProblem& p) { return metric(solve_ef(p, so), p); }, n, seed, threads);
            ordered_json j = {{"g", g}, {"n", r.n}, {"estimate", r.estimate}, {"std_error", r.std_error}};
            emit(out, j.dump(2) + "\n");
            if (!out.empty()) {
                write_json(out + ".manifest.json", {{"command", "mc"},
                                                    {"g", g},
                                                    {"n", n},
                                                    {"seed", seed},
                                                    {"threads", threads},
                                                    {"elapsed_seconds", r.elapsed_seconds},
                                                    {"domain", domain_to_json(mc_domain)},
                                                    {"solver", mc_solver.json()}});
            }
            return kOk;
        }
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << '\n';
        return kInputError;
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kInputError;
    } catch (const WeightFormatError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kInputError;
    } catch (const std::invalid_argument& e) {
        // Library contract violations all trace back to user-supplied values.
        std::cerr << "error: " << e.what() << '\n';
        return kInputError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kFailure;
    }
    return kUsage;
}
