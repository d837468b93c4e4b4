#include "uqkit/cli/pipeline.hpp"

#include <cmath>

#include "uqkit/calibration.hpp"
#include "uqkit/error.hpp"
#include "uqkit/predictive.hpp"
#include "uqkit/prob.hpp"

namespace uqkit::cli {

namespace {

using ojson = nlohmann::ordered_json;

CsvTable single_trace(const std::vector<double>& values, const char* name) {
    CsvTable t{{"epoch", name}, {{}, {}}};
    for (std::size_t e = 0; e < values.size(); ++e) {
        t.values[0].push_back(static_cast<double>(e + 1));
        t.values[1].push_back(values[e]);
    }
    return t;
}

OptimConfig optimizer_for(const RunConfig& cfg) {
    OptimConfig opt = cfg.optimizer;
    opt.seed = cfg.optimizer_seed();
    return opt;
}

Matrix log_probs(const Matrix& p) {
    Matrix out = p;
    for (double& v : out.flat()) v = std::log(std::max(v, metrics::probability_floor));
    return out;
}

} // namespace

std::string format_set(const conformal::PredictionSet& set) {
    std::string s;
    for (std::size_t i = 0; i < set.size(); ++i) s += (i ? ";" : "") + std::to_string(set[i]);
    return s;
}

Dataset load_dataset(const RunConfig& cfg) {
    if (cfg.data.synth) {
        const auto& s = *cfg.data.synth;
        if (s.name == "sine") return synth_regression(s.n, s.noise, cfg.data_seed());
        return synth_classification(s.name, s.n, s.noise, cfg.data_seed(), s.classes);
    }
    return load_csv(*cfg.data.path, cfg.task, cfg.data.target_column, cfg.data.num_classes);
}

MlpConfig model_config(const RunConfig& cfg, const Dataset& data) {
    MlpConfig m;
    m.input_dim = data.dim();
    m.hidden_widths = cfg.hidden_widths;
    m.activation = cfg.activation;
    m.head = cfg.head;
    m.output_dim = cfg.head == Head::classification ? data.num_classes : cfg.head == Head::gaussian ? 2 : 1;
    m.noise_variance = cfg.noise_variance;
    m.init_seed = cfg.init_seed();
    m.validate();
    return m;
}

FittedPosterior fit_posterior(const RunConfig& cfg, const MlpConfig& model, const Dataset& train) {
    const OptimConfig opt = optimizer_for(cfg);
    FittedPosterior f;
    if (cfg.method == "ensemble") {
        auto r = ensemble_fit(model, train, opt, cfg.ensemble_members);
        f.trace.columns.push_back("epoch");
        f.trace.values.emplace_back();
        for (std::size_t e = 0; e < opt.epochs; ++e) f.trace.values[0].push_back(static_cast<double>(e + 1));
        for (std::size_t m = 0; m < r.traces.size(); ++m) {
            f.trace.columns.push_back("member_" + std::to_string(m));
            auto col = r.traces[m];
            col.resize(opt.epochs, std::nan(""));
            f.trace.values.push_back(col);
        }
        f.state = std::move(r.state);
        f.status = r.status;
        return f;
    }
    if (cfg.method == "advi") {
        AdviConfig advi = cfg.advi;
        advi.prior_precision = cfg.prior_precision;
        auto r = advi_fit(model, train, opt, advi);
        f.trace = single_trace(r.trace, "elbo");
        f.state = std::move(r.state);
        f.status = r.status;
        return f;
    }

    auto map = map_fit(model, train, opt);
    f.trace = single_trace(map.trace, "objective");
    f.state = map.state;
    f.status = map.status;
    if (map.status.diverged || cfg.method == "map") return f;

    if (cfg.method == "laplace") {
        auto r = laplace_fit(map.state, model, train, cfg.prior_precision);
        if (r.warning) f.warnings.push_back(*r.warning);
        f.state = std::move(r.state);
        return f;
    }
    OptimConfig phase = opt;
    phase.epochs = cfg.swag_epochs.value_or(opt.epochs);
    auto r = swag_fit(map.state, model, train, phase, cfg.swag);
    f.trace.columns.push_back("phase");
    f.trace.values.emplace_back(map.trace.size(), 0.0);
    for (std::size_t e = 0; e < r.trace.size(); ++e) {
        f.trace.values[0].push_back(static_cast<double>(map.trace.size() + e + 1));
        f.trace.values[1].push_back(r.trace[e]);
        f.trace.values[2].push_back(1.0);
    }
    f.status = r.status;
    if (!r.status.diverged) f.state = std::move(r.state);
    return f;
}

Evaluation evaluate_posterior(const RunConfig& cfg, const MlpConfig& model, const PosteriorState& state,
                              const Dataset& calib, const Dataset& test) {
    const PredictiveConfig pcfg{cfg.n_samples, cfg.predictive_seed()};
    Evaluation ev;
    if (model.head == Head::classification) {
        Matrix p_cal = predictive_mean_classification(state, model, calib.inputs, pcfg);
        Matrix p_test = predictive_mean_classification(state, model, test.inputs, pcfg);
        if (cfg.calibration) {
            auto fit = calibration::fit_temperature(log_probs(p_cal), calib.labels, cfg.calibration_optimizer);
            if (fit.status.warning) ev.warnings.push_back(*fit.status.warning);
            ev.temperature = fit.t.value();
            p_cal = calibration::apply_temperature(log_probs(p_cal), fit.t);
            p_test = calibration::apply_temperature(log_probs(p_test), fit.t);
        }
        ev.report = metrics::classification_report(p_test, test.labels, cfg.bins);
        for (std::size_t c = 0; c < p_test.cols(); ++c) ev.predictions.columns.push_back("p" + std::to_string(c));
        ev.predictions.columns.push_back("entropy");
        ev.predictions.values.assign(p_test.cols() + 1, {});
        for (std::size_t i = 0; i < p_test.rows(); ++i) {
            for (std::size_t c = 0; c < p_test.cols(); ++c) ev.predictions.values[c].push_back(p_test(i, c));
            ev.predictions.values.back().push_back(entropy(p_test.row(i)));
        }
        if (cfg.conformal) {
            const conformal::ErrorLevel alpha(cfg.conformal->alpha);
            ev.sets = cfg.conformal->method == "baseline"
                          ? conformal::baseline_sets(p_cal, calib.labels, p_test, alpha)
                          : conformal::adaptive_sets(p_cal, calib.labels, p_test, alpha, cfg.conformal->mode,
                                                     cfg.conformal_seed());
            const auto sm = metrics::set_metrics(*ev.sets, test.labels);
            ev.report.coverage = sm.coverage;
            ev.report.mean_width = sm.mean_width;
        }
        return ev;
    }

    auto m_cal = predictive_moments_regression(state, model, calib.inputs, pcfg);
    auto m_test = predictive_moments_regression(state, model, test.inputs, pcfg);
    std::vector<double> var_cal = m_cal.total, var_test = m_test.total;
    if (cfg.calibration) {
        auto fit = calibration::fit_variance_scale(m_cal.mean, var_cal, calib.targets);
        if (fit.warning) ev.warnings.push_back(*fit.warning);
        ev.variance_scale = fit.s;
        var_cal = calibration::apply_variance_scale(var_cal, fit.s);
        var_test = calibration::apply_variance_scale(var_test, fit.s);
    }
    ev.report.n = test.size();
    ev.report.bins = cfg.bins;
    ev.report.nll = metrics::gaussian_nll(m_test.mean, var_test, test.targets);
    ev.predictions.columns = {"mean", "aleatoric", "epistemic", "variance"};
    ev.predictions.values = {m_test.mean, m_test.aleatoric, m_test.epistemic, var_test};
    if (cfg.conformal) {
        auto sd = [](std::vector<double> v) {
            for (double& x : v) x = std::sqrt(x);
            return v;
        };
        auto iv = conformal::scalar_score_interval(m_cal.mean, sd(var_cal), calib.targets, m_test.mean, sd(var_test),
                                                   conformal::ErrorLevel(cfg.conformal->alpha));
        const auto im = metrics::interval_metrics(iv, test.targets);
        ev.report.coverage = im.coverage;
        ev.report.mean_width = im.mean_width;
        ev.predictions.columns.insert(ev.predictions.columns.end(), {"lower", "upper"});
        ev.predictions.values.emplace_back();
        ev.predictions.values.emplace_back();
        for (const auto& i : iv) {
            ev.predictions.values[4].push_back(i.lower);
            ev.predictions.values[5].push_back(i.upper);
        }
    }
    return ev;
}

TrainOutcome run_training(const RunConfig& cfg) {
    const Dataset all = load_dataset(cfg);
    const Splits parts = split(all, cfg.split, cfg.split_seed());
    TrainOutcome out;
    out.saved.model = model_config(cfg, all);
    out.fit = fit_posterior(cfg, out.saved.model, parts.train);
    out.saved.state = out.fit.state;

    ojson s;
    s["method"] = cfg.method;
    s["task"] = std::string(to_string(cfg.task));
    s["n_train"] = parts.train.size();
    s["n_calib"] = parts.calib.size();
    s["n_test"] = parts.test.size();
    if (out.fit.status.diverged) {
        s["status"] = "diverged";
        s["message"] = out.fit.status.message;
        out.summary = s;
        return out;
    }
    out.evaluation = evaluate_posterior(cfg, out.saved.model, out.saved.state, parts.calib, parts.test);
    s["status"] = "ok";
    if (cfg.task == Task::classification) {
        const Matrix p = predictive_mean_classification(out.saved.state, out.saved.model, parts.train.inputs,
                                                        PredictiveConfig{cfg.n_samples, cfg.predictive_seed()});
        s["train_accuracy"] = metrics::accuracy(p, parts.train.labels);
    }
    if (out.evaluation.temperature) s["temperature"] = *out.evaluation.temperature;
    if (out.evaluation.variance_scale) s["variance_scale"] = *out.evaluation.variance_scale;
    if (cfg.conformal) s["conformal"] = {{"method", cfg.conformal->method}, {"alpha", cfg.conformal->alpha}};
    s["report"] = metrics::to_json(out.evaluation.report);
    out.summary = s;
    return out;
}

BenchmarkResult run_benchmark(const RunConfig& cfg, Execution exec) {
    BenchmarkResult result;
    result.runs.resize(cfg.seeds.size());
    for_each_index(cfg.seeds.size(), exec, [&](std::size_t k) {
        RunConfig run = cfg;
        run.seed = cfg.seeds[k];
        const Dataset all = load_dataset(run);
        const Splits parts = split(all, run.split, run.split_seed());
        const MlpConfig model = model_config(run, all);
        const OptimConfig opt = optimizer_for(run);

        auto map = map_fit(model, parts.train, opt);
        if (map.status.diverged)
            throw DivergenceError("seed " + std::to_string(run.seed) + ": MAP " + map.status.message);
        RunConfig base = run;
        base.calibration = false;
        base.method = "map";
        const PosteriorState map_state = map.state;
        auto baseline = evaluate_posterior(base, model, map_state, parts.calib, parts.test);

        OptimConfig phase = opt;
        phase.epochs = run.swag_epochs.value_or(opt.epochs);
        auto swag = swag_fit(map.state, model, parts.train, phase, run.swag);
        if (swag.status.diverged)
            throw DivergenceError("seed " + std::to_string(run.seed) + ": SWAG " + swag.status.message);
        run.calibration = true;
        auto treated = evaluate_posterior(run, model, PosteriorState{swag.state}, parts.calib, parts.test);
        result.runs[k] = {run.seed, baseline.report, treated.report, treated.temperature.value_or(1.0)};
    });
    for (const char* name : benchmark_metrics) result.tally[name] = {};
    for (const auto& r : result.runs) {
        const std::pair<const char*, std::pair<double, double>> scores[] = {
            {"nll", {*r.baseline.nll, *r.treated.nll}},
            {"ece", {*r.baseline.ece, *r.treated.ece}},
            {"brier", {*r.baseline.brier, *r.treated.brier}},
            {"accuracy", {-*r.baseline.accuracy, -*r.treated.accuracy}},
        };
        for (const auto& [name, pair] : scores) {
            auto& t = result.tally[name];
            if (pair.second < pair.first) ++t.wins;
            else if (pair.second > pair.first) ++t.losses;
            else ++t.ties;
        }
    }
    return result;
}

nlohmann::ordered_json to_json(const BenchmarkResult& result) {
    ojson j;
    ojson seeds = ojson::array(), runs = ojson::array();
    for (const auto& r : result.runs) {
        seeds.push_back(r.seed);
        runs.push_back({{"seed", r.seed},
                        {"baseline", metrics::to_json(r.baseline)},
                        {"swag_temperature", metrics::to_json(r.treated)},
                        {"temperature", r.temperature}});
    }
    j["seeds"] = seeds;
    j["runs"] = runs;
    ojson tally;
    for (const char* name : benchmark_metrics) {
        const auto& t = result.tally.at(name);
        tally[name] = {{"wins", t.wins}, {"losses", t.losses}, {"ties", t.ties}};
    }
    j["tally"] = tally;
    return j;
}

} // namespace uqkit::cli
