#include "uqkit/cli/app.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <optional>

#include "uqkit/calibration.hpp"
#include "uqkit/cli/config.hpp"
#include "uqkit/cli/io.hpp"
#include "uqkit/cli/pipeline.hpp"
#include "uqkit/error.hpp"
#include "uqkit/metrics.hpp"
#include "uqkit/predictive.hpp"
#include "uqkit/prob.hpp"
#include "uqkit/serialize.hpp"

namespace uqkit::cli {

namespace {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

class Log {
public:
    enum Level { error = 0, warn = 1, info = 2, debug = 3 };

    explicit Log(std::ostream& err) : err_(err) {
        if (const char* env = std::getenv("UQKIT_LOG_LEVEL")) {
            const std::string v = env;
            if (v == "error") level_ = error;
            else if (v == "warn") level_ = warn;
            else if (v == "info") level_ = info;
            else if (v == "debug") level_ = debug;
        }
    }

    void write(Level l, const std::string& msg) {
        static constexpr const char* names[] = {"error", "warning", "info", "debug"};
        if (l <= level_) err_ << names[l] << ": " << msg << '\n';
    }

private:
    std::ostream& err_;
    Level level_ = warn;
};

void print(std::ostream& out, const ojson& j) { out << j.dump(2) << '\n'; }

void require_flag(bool present, const std::string& method, const std::string& flag) {
    if (!present) throw InvalidInput("--method " + method + " requires " + flag);
}

struct ConformalFlags {
    std::string method;
    double alpha = 0.0;
    std::string val_probs, val_targets, test_probs, test_targets;
    std::string val_bounds, test_bounds, val_pred, test_pred;
    std::string train, test_inputs, target_column = "target";
    std::size_t folds = 5;
    double penalty = 1e-3;
    std::string mode = "deterministic";
    std::uint64_t seed = 0;
    std::string out;
};

int cmd_conformal(const ConformalFlags& f, std::ostream& out) {
    const conformal::ErrorLevel alpha(f.alpha);
    const auto mode = f.mode == "randomized" ? conformal::ApsMode::randomized : conformal::ApsMode::deterministic;
    ojson report;
    report["method"] = f.method;
    report["alpha"] = f.alpha;

    if (f.method == "baseline" || f.method == "adaptive") {
        require_flag(!f.val_probs.empty(), f.method, "--val-probs");
        require_flag(!f.val_targets.empty(), f.method, "--val-targets");
        require_flag(!f.test_probs.empty(), f.method, "--test-probs");
        const Matrix val = read_probs(f.val_probs), test = read_probs(f.test_probs);
        if (test.cols() != val.cols()) throw DataError(f.test_probs + ": class count differs from " + f.val_probs);
        const auto labels = read_labels(f.val_targets, val.cols());
        if (labels.size() != val.rows()) throw DataError(f.val_targets + ": row count differs from " + f.val_probs);
        const auto sets = f.method == "baseline" ? conformal::baseline_sets(val, labels, test, alpha)
                                                 : conformal::adaptive_sets(val, labels, test, alpha, mode, f.seed);
        write_sets(f.out, sets);
        report["n_val"] = val.rows();
        report["n_test"] = test.rows();
        if (!f.test_targets.empty()) {
            const auto y = read_labels(f.test_targets, test.cols());
            if (y.size() != test.rows()) throw DataError(f.test_targets + ": row count differs from " + f.test_probs);
            const auto m = metrics::set_metrics(sets, y);
            report["coverage"] = m.coverage;
            report["mean_size"] = m.mean_width;
        }
        print(out, report);
        return ok;
    }

    std::vector<Interval> intervals;
    std::size_t n_val = 0;
    if (f.method == "cqr" || f.method == "scalar") {
        const bool cqr = f.method == "cqr";
        const std::vector<std::string> cols = cqr ? std::vector<std::string>{"lower", "upper"}
                                                  : std::vector<std::string>{"mean", "std"};
        const std::string val_flag = cqr ? "--val-bounds" : "--val-pred", test_flag = cqr ? "--test-bounds" : "--test-pred";
        const std::string& val_path = cqr ? f.val_bounds : f.val_pred;
        const std::string& test_path = cqr ? f.test_bounds : f.test_pred;
        require_flag(!val_path.empty(), f.method, val_flag);
        require_flag(!f.val_targets.empty(), f.method, "--val-targets");
        require_flag(!test_path.empty(), f.method, test_flag);
        const auto v = read_columns(val_path, cols), t = read_columns(test_path, cols);
        const auto y = read_targets(f.val_targets);
        if (y.size() != v[0].size()) throw DataError(f.val_targets + ": row count differs from " + val_path);
        if (cqr) {
            for (std::size_t i = 0; i < v[0].size(); ++i)
                if (v[0][i] > v[1][i]) throw DataError(val_path + ": row " + std::to_string(i + 2) + " has lower > upper");
            for (std::size_t i = 0; i < t[0].size(); ++i)
                if (t[0][i] > t[1][i]) throw DataError(test_path + ": row " + std::to_string(i + 2) + " has lower > upper");
            intervals = conformal::cqr_interval(v[0], v[1], y, t[0], t[1], alpha);
        } else {
            for (const auto* col : {&v[1], &t[1]})
                for (std::size_t i = 0; i < col->size(); ++i)
                    if (!((*col)[i] > 0.0))
                        throw DataError((col == &v[1] ? val_path : test_path) + ": row " + std::to_string(i + 2) +
                                        " has a non-positive std");
            intervals = conformal::scalar_score_interval(v[0], v[1], y, t[0], t[1], alpha);
        }
        n_val = y.size();
    } else {
        require_flag(!f.train.empty(), f.method, "--train");
        require_flag(!f.test_inputs.empty(), f.method, "--test-inputs");
        const Dataset train = load_csv(f.train, Task::regression, f.target_column);
        const Matrix test = read_matrix(f.test_inputs);
        if (test.cols() != train.dim())
            throw DataError(f.test_inputs + ": has " + std::to_string(test.cols()) + " columns, training data has " +
                            std::to_string(train.dim()) + " features");
        const auto trainer = conformal::ridge_trainer(f.penalty);
        const conformal::ResamplingOptions opts{f.seed, Execution::parallel};
        if (f.method == "jackknife_plus") intervals = conformal::jackknife_plus(trainer, train, test, alpha, opts);
        else if (f.method == "jackknife_minmax") intervals = conformal::jackknife_minmax(trainer, train, test, alpha, opts);
        else intervals = conformal::cv_plus(trainer, train, f.folds, test, alpha, opts);
        n_val = train.size();
    }
    write_intervals(f.out, intervals);
    report["n_val"] = n_val;
    report["n_test"] = intervals.size();
    if (!f.test_targets.empty()) {
        const auto y = read_targets(f.test_targets);
        if (y.size() != intervals.size()) throw DataError(f.test_targets + ": row count differs from the test inputs");
        const auto m = metrics::interval_metrics(intervals, y);
        report["coverage"] = m.coverage;
        report["mean_width"] = m.mean_width;
    }
    print(out, report);
    return ok;
}

struct CalibrateFlags {
    std::string logits, pred, targets, test_logits, test_pred, optimizer = "golden_section", out_dir;
};

int cmd_calibrate(const CalibrateFlags& f, std::ostream& out, Log& log) {
    if (f.logits.empty() == f.pred.empty()) throw InvalidInput("calibrate needs exactly one of --logits or --pred");
    fs::create_directories(f.out_dir);
    ojson report;
    CsvTable calibrated;
    if (!f.logits.empty()) {
        const Matrix logits = read_matrix(f.logits);
        if (logits.cols() < 2) throw DataError(f.logits + ": logits need at least two class columns");
        const auto y = read_labels(f.targets, logits.cols());
        if (y.size() != logits.rows()) throw DataError(f.targets + ": row count differs from " + f.logits);
        const auto opt = f.optimizer == "adam" ? calibration::TemperatureOptimizer::adam
                                               : calibration::TemperatureOptimizer::golden_section;
        const auto fit = calibration::fit_temperature(logits, y, opt);
        report["t"] = fit.t.value();
        report["nll_before"] = fit.status.nll_before;
        report["nll_after"] = fit.status.nll_after;
        report["iterations"] = fit.status.iterations;
        report["at_boundary"] = fit.status.at_boundary;
        if (fit.status.warning) {
            report["warning"] = *fit.status.warning;
            log.write(Log::warn, *fit.status.warning);
        }
        const Matrix target = f.test_logits.empty() ? logits : read_matrix(f.test_logits);
        if (target.cols() != logits.cols()) throw DataError(f.test_logits + ": class count differs from " + f.logits);
        const Matrix p = calibration::apply_temperature(target, fit.t);
        const auto h = calibration::calibrated_entropy(target, fit.t);
        for (std::size_t c = 0; c < p.cols(); ++c) calibrated.columns.push_back("p" + std::to_string(c));
        calibrated.columns.push_back("entropy");
        calibrated.values.assign(p.cols() + 1, {});
        for (std::size_t i = 0; i < p.rows(); ++i) {
            for (std::size_t c = 0; c < p.cols(); ++c) calibrated.values[c].push_back(p(i, c));
            calibrated.values.back().push_back(h[i]);
        }
    } else {
        const auto v = read_columns(f.pred, {"mean", "variance"});
        const auto y = read_targets(f.targets);
        if (y.size() != v[0].size()) throw DataError(f.targets + ": row count differs from " + f.pred);
        for (std::size_t i = 0; i < v[1].size(); ++i)
            if (!(v[1][i] > 0.0)) throw DataError(f.pred + ": row " + std::to_string(i + 2) + " has a non-positive variance");
        const auto fit = calibration::fit_variance_scale(v[0], v[1], y);
        report["s"] = fit.s;
        report["nll_before"] = metrics::gaussian_nll(v[0], v[1], y);
        report["nll_after"] = metrics::gaussian_nll(v[0], calibration::apply_variance_scale(v[1], fit.s), y);
        if (fit.warning) {
            report["warning"] = *fit.warning;
            log.write(Log::warn, *fit.warning);
        }
        const auto t = f.test_pred.empty() ? v : read_columns(f.test_pred, {"mean", "variance"});
        for (std::size_t i = 0; i < t[1].size(); ++i)
            if (!(t[1][i] > 0.0))
                throw DataError(f.test_pred + ": row " + std::to_string(i + 2) + " has a non-positive variance");
        calibrated = CsvTable{{"mean", "variance"}, {t[0], calibration::apply_variance_scale(t[1], fit.s)}};
    }
    write_text(fs::path(f.out_dir) / "calibration.json", report.dump(2) + "\n");
    write_csv_table(fs::path(f.out_dir) / "calibrated.csv", calibrated);
    print(out, report);
    return ok;
}

struct RunFlags {
    std::string config, out_dir;
    std::optional<std::uint64_t> seed;
};

fs::path resolve_out_dir(const RunFlags& f, const RunConfig& cfg) {
    if (!f.out_dir.empty()) return f.out_dir;
    if (cfg.out_dir) return *cfg.out_dir;
    throw InvalidInput("no output directory: set out_dir in the config or pass --out-dir");
}

int cmd_train(const RunFlags& f, std::ostream& out, Log& log) {
    RunConfig cfg = load_run_config(f.config, ConfigKind::train);
    if (f.seed) cfg.seed = *f.seed;
    const fs::path dir = resolve_out_dir(f, cfg);
    auto outcome = run_training(cfg);
    fs::create_directories(dir);
    save_state(dir / "state.json", outcome.saved);
    write_csv_table(dir / "trace.csv", outcome.fit.trace);
    for (const auto& w : outcome.fit.warnings) log.write(Log::warn, w);
    if (outcome.fit.status.diverged) {
        log.write(Log::error, "training diverged: " + outcome.fit.status.message);
        write_text(dir / "report.json", outcome.summary.dump(2) + "\n");
        print(out, outcome.summary);
        return diverged;
    }
    for (const auto& w : outcome.evaluation.warnings) log.write(Log::warn, w);
    write_csv_table(dir / "predictions.csv", outcome.evaluation.predictions);
    if (outcome.evaluation.sets) write_sets(dir / "sets.csv", *outcome.evaluation.sets);
    write_text(dir / "report.json", outcome.summary.dump(2) + "\n");
    log.write(Log::info, "wrote " + dir.string());
    print(out, outcome.summary);
    return ok;
}

struct EvaluateFlags {
    std::string probs, pred, targets, state, data, target_column = "target", calib_data, out;
    std::string val_probs, val_pred, val_targets, conformal_method = "baseline", mode = "deterministic";
    std::size_t bins = metrics::default_bins;
    std::optional<double> alpha;
    std::optional<std::size_t> n_samples;
    std::uint64_t seed = 0;
};

int cmd_evaluate(const EvaluateFlags& f, std::ostream& out) {
    const int modes = !f.probs.empty() + !f.pred.empty() + !f.state.empty();
    if (modes != 1) throw InvalidInput("evaluate needs exactly one of --probs, --pred or --state");
    if (f.bins < 1) throw InvalidInput("--bins must be at least 1");
    std::optional<conformal::ErrorLevel> alpha;
    if (f.alpha) alpha.emplace(*f.alpha);
    const auto mode = f.mode == "randomized" ? conformal::ApsMode::randomized : conformal::ApsMode::deterministic;
    if (f.conformal_method != "baseline" && f.conformal_method != "adaptive")
        throw InvalidInput("--conformal-method must be baseline or adaptive");

    auto class_report = [&](const Matrix& probs, const std::vector<int>& y, const Matrix* val_p,
                            const std::vector<int>* val_y) {
        auto report = metrics::classification_report(probs, y, f.bins);
        if (alpha && val_p) {
            const auto sets = f.conformal_method == "baseline"
                                  ? conformal::baseline_sets(*val_p, *val_y, probs, *alpha)
                                  : conformal::adaptive_sets(*val_p, *val_y, probs, *alpha, mode, f.seed);
            const auto m = metrics::set_metrics(sets, y);
            report.coverage = m.coverage;
            report.mean_width = m.mean_width;
        }
        return report;
    };
    auto reg_report = [&](const std::vector<double>& mean, const std::vector<double>& var,
                          const std::vector<double>& y, const std::vector<double>* vm, const std::vector<double>* vv,
                          const std::vector<double>* vy) {
        metrics::Report report;
        report.n = y.size();
        report.bins = f.bins;
        report.nll = metrics::gaussian_nll(mean, var, y);
        if (alpha && vm) {
            auto sd = [](std::vector<double> v) {
                for (double& x : v) x = std::sqrt(x);
                return v;
            };
            const auto iv = conformal::scalar_score_interval(*vm, sd(*vv), *vy, mean, sd(var), *alpha);
            const auto m = metrics::interval_metrics(iv, y);
            report.coverage = m.coverage;
            report.mean_width = m.mean_width;
        }
        return report;
    };

    metrics::Report report;
    if (!f.probs.empty()) {
        require_flag(!f.targets.empty(), "evaluate --probs", "--targets");
        const Matrix p = read_probs(f.probs);
        const auto y = read_labels(f.targets, p.cols());
        if (y.size() != p.rows()) throw DataError(f.targets + ": row count differs from " + f.probs);
        if (alpha) {
            if (f.val_probs.empty() || f.val_targets.empty())
                throw InvalidInput("--alpha with --probs requires --val-probs and --val-targets");
            const Matrix vp = read_probs(f.val_probs);
            if (vp.cols() != p.cols()) throw DataError(f.val_probs + ": class count differs from " + f.probs);
            const auto vy = read_labels(f.val_targets, vp.cols());
            if (vy.size() != vp.rows()) throw DataError(f.val_targets + ": row count differs from " + f.val_probs);
            report = class_report(p, y, &vp, &vy);
        } else {
            report = class_report(p, y, nullptr, nullptr);
        }
    } else if (!f.pred.empty()) {
        require_flag(!f.targets.empty(), "evaluate --pred", "--targets");
        const auto v = read_columns(f.pred, {"mean", "variance"});
        const auto y = read_targets(f.targets);
        if (y.size() != v[0].size()) throw DataError(f.targets + ": row count differs from " + f.pred);
        for (double s : v[1])
            if (!(s > 0.0)) throw DataError(f.pred + ": variances must be positive");
        if (alpha) {
            if (f.val_pred.empty() || f.val_targets.empty())
                throw InvalidInput("--alpha with --pred requires --val-pred and --val-targets");
            const auto vv = read_columns(f.val_pred, {"mean", "variance"});
            const auto vy = read_targets(f.val_targets);
            if (vy.size() != vv[0].size()) throw DataError(f.val_targets + ": row count differs from " + f.val_pred);
            for (double s : vv[1])
                if (!(s > 0.0)) throw DataError(f.val_pred + ": variances must be positive");
            report = reg_report(v[0], v[1], y, &vv[0], &vv[1], &vy);
        } else {
            report = reg_report(v[0], v[1], y, nullptr, nullptr, nullptr);
        }
    } else {
        require_flag(!f.data.empty(), "evaluate --state", "--data");
        const auto saved = load_state(f.state);
        const Task task = saved.model.task();
        auto load = [&](const std::string& path) {
            Dataset ds = load_csv(path, task, f.target_column,
                                  task == Task::classification ? std::optional<std::size_t>(saved.model.output_dim)
                                                               : std::nullopt);
            if (ds.dim() != saved.model.input_dim)
                throw DataError(path + ": has " + std::to_string(ds.dim()) + " features, the model expects " +
                                std::to_string(saved.model.input_dim));
            return ds;
        };
        const Dataset test = load(f.data);
        std::optional<Dataset> calib;
        if (alpha) {
            if (f.calib_data.empty()) throw InvalidInput("--alpha with --state requires --calib-data");
            calib = load(f.calib_data);
        }
        const PredictiveConfig pcfg{f.n_samples, f.seed};
        if (task == Task::classification) {
            const Matrix p = predictive_mean_classification(saved.state, saved.model, test.inputs, pcfg);
            if (calib) {
                const Matrix vp = predictive_mean_classification(saved.state, saved.model, calib->inputs, pcfg);
                report = class_report(p, test.labels, &vp, &calib->labels);
            } else {
                report = class_report(p, test.labels, nullptr, nullptr);
            }
        } else {
            const auto m = predictive_moments_regression(saved.state, saved.model, test.inputs, pcfg);
            if (calib) {
                const auto vm = predictive_moments_regression(saved.state, saved.model, calib->inputs, pcfg);
                report = reg_report(m.mean, m.total, test.targets, &vm.mean, &vm.total, &calib->targets);
            } else {
                report = reg_report(m.mean, m.total, test.targets, nullptr, nullptr, nullptr);
            }
        }
    }
    const auto j = metrics::to_json(report);
    if (!f.out.empty()) write_text(f.out, j.dump(2) + "\n");
    print(out, j);
    return ok;
}

int cmd_benchmark(const RunFlags& f, std::ostream& out, Log& log) {
    RunConfig cfg = load_run_config(f.config, ConfigKind::benchmark);
    const auto result = run_benchmark(cfg);
    const auto j = to_json(result);
    std::optional<fs::path> dir;
    if (!f.out_dir.empty()) dir = f.out_dir;
    else if (cfg.out_dir) dir = *cfg.out_dir;
    if (dir) {
        fs::create_directories(*dir);
        write_text(*dir / "benchmark.json", j.dump(2) + "\n");
        log.write(Log::info, "wrote " + (*dir / "benchmark.json").string());
    }
    print(out, j);
    return ok;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    Log log(err);
    CLI::App app{"uqkit: uncertainty quantification for classifiers and regressors"};
    app.name("uqkit");
    app.require_subcommand(1, 1);

    ConformalFlags cf;
    auto* conf = app.add_subcommand("conformal", "Conformal prediction sets or intervals from model outputs");
    conf->add_option("--method", cf.method, "Conformal method")
        ->required()
        ->check(CLI::IsMember({"baseline", "adaptive", "cqr", "scalar", "jackknife_plus", "jackknife_minmax", "cv_plus"}));
    conf->add_option("--alpha", cf.alpha, "Miscoverage level in (0, 1)")->required();
    conf->add_option("--val-probs", cf.val_probs, "Validation class probabilities CSV");
    conf->add_option("--val-targets", cf.val_targets, "Validation targets CSV");
    conf->add_option("--test-probs", cf.test_probs, "Test class probabilities CSV");
    conf->add_option("--test-targets", cf.test_targets, "Test targets CSV, for coverage");
    conf->add_option("--val-bounds", cf.val_bounds, "Validation lower,upper CSV (cqr)");
    conf->add_option("--test-bounds", cf.test_bounds, "Test lower,upper CSV (cqr)");
    conf->add_option("--val-pred", cf.val_pred, "Validation mean,std CSV (scalar)");
    conf->add_option("--test-pred", cf.test_pred, "Test mean,std CSV (scalar)");
    conf->add_option("--train", cf.train, "Training CSV with features and target (resampling methods)");
    conf->add_option("--test-inputs", cf.test_inputs, "Test feature CSV (resampling methods)");
    conf->add_option("--target-column", cf.target_column, "Target column of --train")->capture_default_str();
    conf->add_option("--folds", cf.folds, "Folds for cv_plus")->capture_default_str();
    conf->add_option("--penalty", cf.penalty, "Ridge penalty of the built-in trainer")->capture_default_str();
    conf->add_option("--mode", cf.mode, "Adaptive set mode")
        ->check(CLI::IsMember({"deterministic", "randomized"}))
        ->capture_default_str();
    conf->add_option("--seed", cf.seed, "Seed for randomized sets and CV folds")->capture_default_str();
    conf->add_option("--out", cf.out, "Output CSV")->required();

    CalibrateFlags kf;
    auto* cal = app.add_subcommand("calibrate", "Fit temperature (logits) or variance scale (mean,variance)");
    cal->add_option("--logits", kf.logits, "Calibration logits CSV");
    cal->add_option("--pred", kf.pred, "Calibration mean,variance CSV");
    cal->add_option("--targets", kf.targets, "Calibration targets CSV")->required();
    cal->add_option("--test-logits", kf.test_logits, "Logits to calibrate (defaults to --logits)");
    cal->add_option("--test-pred", kf.test_pred, "Predictions to calibrate (defaults to --pred)");
    cal->add_option("--optimizer", kf.optimizer, "Temperature optimizer")
        ->check(CLI::IsMember({"golden_section", "adam"}))
        ->capture_default_str();
    cal->add_option("--out-dir", kf.out_dir, "Output directory")->required();

    RunFlags tf;
    auto* train = app.add_subcommand("train", "Train a model and posterior from a JSON config");
    train->add_option("--config", tf.config, "Run config JSON")->required();
    train->add_option("--out-dir", tf.out_dir, "Output directory (overrides out_dir)");
    train->add_option("--seed", tf.seed, "Seed (overrides the config)");

    EvaluateFlags ef;
    auto* eval = app.add_subcommand("evaluate", "Report metrics for saved outputs or a saved posterior");
    eval->add_option("--probs", ef.probs, "Test class probabilities CSV");
    eval->add_option("--pred", ef.pred, "Test mean,variance CSV");
    eval->add_option("--targets", ef.targets, "Test targets CSV");
    eval->add_option("--state", ef.state, "Saved posterior state JSON");
    eval->add_option("--data", ef.data, "Test data CSV (with --state)");
    eval->add_option("--calib-data", ef.calib_data, "Calibration data CSV for conformal coverage (with --state)");
    eval->add_option("--target-column", ef.target_column, "Target column of data files")->capture_default_str();
    eval->add_option("--val-probs", ef.val_probs, "Validation probabilities CSV for conformal coverage");
    eval->add_option("--val-pred", ef.val_pred, "Validation mean,variance CSV for conformal coverage");
    eval->add_option("--val-targets", ef.val_targets, "Validation targets CSV");
    eval->add_option("--alpha", ef.alpha, "Also report conformal coverage at this level");
    eval->add_option("--conformal-method", ef.conformal_method, "baseline or adaptive")->capture_default_str();
    eval->add_option("--mode", ef.mode, "Adaptive set mode")
        ->check(CLI::IsMember({"deterministic", "randomized"}))
        ->capture_default_str();
    eval->add_option("--bins", ef.bins, "ECE bins")->capture_default_str();
    eval->add_option("--n-samples", ef.n_samples, "Posterior draws (with --state)");
    eval->add_option("--seed", ef.seed, "Seed for posterior draws")->capture_default_str();
    eval->add_option("--out", ef.out, "Also write the report here");

    RunFlags bf;
    auto* bench = app.add_subcommand("benchmark", "MAP against SWAG with temperature scaling over several seeds");
    bench->add_option("--config", bf.config, "Benchmark config JSON")->required();
    bench->add_option("--out-dir", bf.out_dir, "Output directory (overrides out_dir)");

    std::vector<const char*> argv{"uqkit"};
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        const auto subs = app.get_subcommands();
        out << (subs.empty() ? app.help() : subs.front()->help());
        return ok;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n";
        const auto subs = app.get_subcommands();
        err << (subs.empty() ? app.help() : subs.front()->help());
        return bad_usage;
    }

    try {
        if (conf->parsed()) return cmd_conformal(cf, out);
        if (cal->parsed()) return cmd_calibrate(kf, out, log);
        if (train->parsed()) return cmd_train(tf, out, log);
        if (eval->parsed()) return cmd_evaluate(ef, out);
        return cmd_benchmark(bf, out, log);
    } catch (const ConfigError& e) {
        log.write(Log::error, e.what());
        return bad_usage;
    } catch (const DataError& e) {
        log.write(Log::error, e.what());
        return bad_data;
    } catch (const DivergenceError& e) {
        log.write(Log::error, e.what());
        return diverged;
    } catch (const InvalidInput& e) {
        log.write(Log::error, e.what());
        return bad_usage;
    } catch (const fs::filesystem_error& e) {
        log.write(Log::error, e.what());
        return bad_data;
    } catch (const std::exception& e) {
        log.write(Log::error, std::string("internal error: ") + e.what());
        return internal_error;
    }
}

} // namespace uqkit::cli
