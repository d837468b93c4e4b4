#include "uqkit/cli/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace uqkit::cli {

namespace {

using json = nlohmann::json;

std::string join_lines(const std::vector<std::string>& lines) {
    std::string out = "invalid config:";
    for (const auto& l : lines) out += "\n  " + l;
    return out;
}

// Reads one JSON object, recording type and range errors and, on finish(),
// any key that was never asked for.
class Reader {
public:
    Reader(const json* obj, std::string path, std::vector<std::string>& errors)
        : obj_(obj), path_(std::move(path)), errors_(errors) {
        if (obj_ && !obj_->is_object()) {
            fail("", "must be an object");
            obj_ = nullptr;
        }
    }

    bool has(const char* key) {
        seen_.insert(key);
        return obj_ && obj_->contains(key);
    }

    const json* raw(const char* key) { return has(key) ? &obj_->at(key) : nullptr; }

    std::optional<double> number(const char* key, double lo, double hi, bool lo_open = false) {
        const json* v = raw(key);
        if (!v) return std::nullopt;
        if (!v->is_number()) return fail(key, "must be a number"), std::nullopt;
        const double x = v->get<double>();
        if (!(lo_open ? x > lo : x >= lo) || !(x <= hi)) {
            std::ostringstream os;
            os << "must lie in " << (lo_open ? "(" : "[") << lo << ", " << hi << "], got " << x;
            return fail(key, os.str()), std::nullopt;
        }
        return x;
    }

    std::optional<std::size_t> count(const char* key, std::size_t min) {
        const json* v = raw(key);
        if (!v) return std::nullopt;
        if (!v->is_number_unsigned()) return fail(key, "must be a non-negative integer"), std::nullopt;
        const auto x = v->get<std::size_t>();
        if (x < min) return fail(key, "must be at least " + std::to_string(min)), std::nullopt;
        return x;
    }

    std::optional<std::uint64_t> seed(const char* key) {
        const json* v = raw(key);
        if (!v) return std::nullopt;
        if (!v->is_number_unsigned()) return fail(key, "must be a non-negative integer"), std::nullopt;
        return v->get<std::uint64_t>();
    }

    std::optional<std::string> choice(const char* key, std::initializer_list<const char*> allowed) {
        const json* v = raw(key);
        if (!v) return std::nullopt;
        std::string options;
        for (const char* a : allowed) options += (options.empty() ? "" : ", ") + std::string(a);
        if (!v->is_string()) return fail(key, "must be one of " + options), std::nullopt;
        const auto s = v->get<std::string>();
        for (const char* a : allowed)
            if (s == a) return s;
        return fail(key, "must be one of " + options + ", got '" + s + "'"), std::nullopt;
    }

    std::optional<std::string> text(const char* key) {
        const json* v = raw(key);
        if (!v) return std::nullopt;
        if (!v->is_string()) return fail(key, "must be a string"), std::nullopt;
        return v->get<std::string>();
    }

    std::optional<bool> flag(const char* key) {
        const json* v = raw(key);
        if (!v) return std::nullopt;
        if (!v->is_boolean()) return fail(key, "must be true or false"), std::nullopt;
        return v->get<bool>();
    }

    Reader child(const char* key) { return Reader(raw(key), qualified(key), errors_); }

    void require(const char* key) {
        if (obj_ && !obj_->contains(key)) fail(key, "is required");
    }

    void forbid(const char* key, const std::string& why) {
        if (has(key)) fail(key, why);
    }

    void fail(const std::string& key, const std::string& what) { errors_.push_back(qualified(key) + " " + what); }

    std::string qualified(const std::string& key) const {
        if (key.empty()) return path_.empty() ? "config" : path_;
        return path_.empty() ? key : path_ + "." + key;
    }

    void finish() {
        if (!obj_) return;
        for (const auto& [k, v] : obj_->items())
            if (!seen_.count(k)) fail(k, "is not a recognised key");
    }

private:
    const json* obj_;
    std::string path_;
    std::vector<std::string>& errors_;
    std::set<std::string> seen_;
};

} // namespace

ConfigError::ConfigError(std::vector<std::string> problems)
    : InvalidInput(join_lines(problems)), problems_(std::move(problems)) {}

RunConfig parse_run_config(const json& doc, ConfigKind kind, const std::filesystem::path& base_dir) {
    std::vector<std::string> errors;
    RunConfig cfg;
    Reader top(&doc, "", errors);
    if (!doc.is_object()) throw ConfigError(errors);

    top.require("task");
    if (auto t = top.choice("task", {"classification", "regression"})) cfg.task = parse_task(*t);
    if (auto s = top.seed("seed")) cfg.seed = *s;
    if (auto p = top.choice("preset", {"desk", "fidelity"})) cfg.preset = *p;
    const bool fidelity = cfg.preset == "fidelity";
    cfg.optimizer.epochs = kind == ConfigKind::benchmark && !fidelity ? 50 : 300;
    if (kind == ConfigKind::benchmark && fidelity)
        cfg.calibration_optimizer = calibration::TemperatureOptimizer::adam;
    const bool regression = cfg.task == Task::regression;
    cfg.head = regression ? Head::gaussian : Head::classification;

    top.require("data");
    {
        Reader data = top.child("data");
        if (auto p = data.text("path")) cfg.data.path = base_dir / *p;
        if (auto c = data.text("target_column")) cfg.data.target_column = *c;
        if (auto k = data.count("num_classes", 2)) cfg.data.num_classes = *k;
        if (data.has("synth")) {
            Reader syn = data.child("synth");
            SynthSpec spec;
            if (regression) spec.name = "sine";
            if (auto name = syn.choice("name", {"two_moons", "gaussian_blobs", "sine"})) spec.name = *name;
            if (auto n = syn.count("n", 10)) spec.n = *n;
            if (auto noise = syn.number("noise", 0.0, 1e6)) spec.noise = *noise;
            if (auto k = syn.count("classes", 2)) spec.classes = *k;
            if ((spec.name == "sine") != regression)
                syn.fail("name", "'" + spec.name + "' does not match task " + std::string(to_string(cfg.task)));
            syn.finish();
            cfg.data.synth = spec;
        }
        if (cfg.data.path.has_value() == cfg.data.synth.has_value())
            data.fail("", "needs exactly one of 'path' or 'synth'");
        data.finish();
    }

    if (top.has("split")) {
        Reader split = top.child("split");
        const char* names[3] = {"train", "calib", "test"};
        for (int i = 0; i < 3; ++i)
            if (auto f = split.number(names[i], 0.0, 1.0, true)) cfg.split[static_cast<std::size_t>(i)] = *f;
        if (std::abs(cfg.split[0] + cfg.split[1] + cfg.split[2] - 1.0) > 1e-9)
            split.fail("", "fractions must sum to 1");
        split.finish();
    }

    if (top.has("model")) {
        Reader model = top.child("model");
        if (const json* hw = model.raw("hidden_widths")) {
            if (!hw->is_array()) {
                model.fail("hidden_widths", "must be an array of positive integers");
            } else {
                cfg.hidden_widths.clear();
                for (const auto& w : *hw) {
                    if (!w.is_number_unsigned() || w.get<std::size_t>() == 0) {
                        model.fail("hidden_widths", "must be an array of positive integers");
                        break;
                    }
                    cfg.hidden_widths.push_back(w.get<std::size_t>());
                }
            }
        }
        if (auto a = model.choice("activation", {"tanh", "relu"})) cfg.activation = parse_activation(*a);
        if (auto h = model.choice("head", {"classification", "gaussian", "squared_error"})) {
            cfg.head = parse_head(*h);
            if ((cfg.head == Head::classification) == regression)
                model.fail("head", "'" + *h + "' does not match task " + std::string(to_string(cfg.task)));
        }
        if (auto v = model.number("noise_variance", 0.0, 1e12, true)) cfg.noise_variance = *v;
        model.finish();
    }

    if (kind == ConfigKind::train) {
        if (auto m = top.choice("method", {"map", "ensemble", "swag", "laplace", "advi"})) cfg.method = *m;
    } else {
        top.forbid("method", "is fixed by the benchmark (MAP against SWAG with temperature scaling)");
        cfg.method = "swag";
        cfg.calibration = true;
    }

    if (top.has("optimizer")) {
        Reader opt = top.child("optimizer");
        if (auto a = opt.choice("algorithm", {"adam", "sgd"})) cfg.optimizer.algorithm = parse_algorithm(*a);
        if (auto lr = opt.number("learning_rate", 0.0, 1e6, true)) cfg.optimizer.learning_rate = *lr;
        if (auto e = opt.count("epochs", 1)) cfg.optimizer.epochs = *e;
        if (auto b = opt.count("batch_size", 1)) cfg.optimizer.batch_size = *b;
        if (auto wd = opt.number("weight_decay", 0.0, 1e12)) cfg.optimizer.weight_decay = *wd;
        opt.finish();
    }
    if (auto lam = top.number("prior_precision", 0.0, 1e12, true)) cfg.prior_precision = *lam;

    if (top.has("swag")) {
        Reader swag = top.child("swag");
        if (auto r = swag.count("rank", 1)) cfg.swag.rank = *r;
        if (auto c = swag.count("snapshot_every", 0)) cfg.swag.snapshot_every = *c;
        if (auto e = swag.count("epochs", 1)) cfg.swag_epochs = *e;
        if (auto a = swag.choice("algorithm", {"adam", "sgd"})) cfg.swag.algorithm = parse_algorithm(*a);
        swag.finish();
    }
    if (top.has("ensemble")) {
        Reader ens = top.child("ensemble");
        if (auto m = ens.count("members", 2)) cfg.ensemble_members = *m;
        ens.finish();
    }
    if (top.has("advi")) {
        Reader advi = top.child("advi");
        if (auto s = advi.count("mc_samples", 1)) cfg.advi.mc_samples = *s;
        if (auto l = advi.number("init_log_std", -30.0, 10.0)) cfg.advi.init_log_std = *l;
        advi.finish();
    }
    if (top.has("predictive")) {
        Reader pred = top.child("predictive");
        if (auto s = pred.count("n_samples", 1)) cfg.n_samples = *s;
        pred.finish();
    }
    if (top.has("calibration")) {
        Reader cal = top.child("calibration");
        if (auto e = cal.flag("enabled")) {
            if (kind == ConfigKind::benchmark && !*e) cal.fail("enabled", "cannot be false in a benchmark");
            else cfg.calibration = *e;
        }
        if (auto o = cal.choice("optimizer", {"golden_section", "adam"}))
            cfg.calibration_optimizer = *o == "adam" ? calibration::TemperatureOptimizer::adam
                                                     : calibration::TemperatureOptimizer::golden_section;
        cal.finish();
    }
    if (kind == ConfigKind::train && top.has("conformal")) {
        Reader conf = top.child("conformal");
        ConformalSpec spec;
        conf.require("method");
        if (regression) {
            if (auto m = conf.choice("method", {"scalar"})) spec.method = *m;
        } else if (auto m = conf.choice("method", {"baseline", "adaptive"})) {
            spec.method = *m;
        }
        if (auto a = conf.number("alpha", 0.0, 1.0, true)) {
            if (*a >= 1.0) conf.fail("alpha", "must lie strictly between 0 and 1");
            spec.alpha = *a;
        }
        if (auto mode = conf.choice("mode", {"deterministic", "randomized"}))
            spec.mode = *mode == "randomized" ? conformal::ApsMode::randomized : conformal::ApsMode::deterministic;
        conf.finish();
        cfg.conformal = spec;
    } else if (kind == ConfigKind::benchmark) {
        top.forbid("conformal", "is not used by the benchmark");
    }
    if (top.has("metrics")) {
        Reader met = top.child("metrics");
        if (auto b = met.count("bins", 1)) cfg.bins = *b;
        met.finish();
    }
    if (auto o = top.text("out_dir")) cfg.out_dir = base_dir / *o;

    if (kind == ConfigKind::benchmark) {
        top.require("seeds");
        if (const json* s = top.raw("seeds")) {
            if (!s->is_array() || s->size() < 3) {
                top.fail("seeds", "must be an array of at least 3 non-negative integers");
            } else {
                for (const auto& v : *s) {
                    if (!v.is_number_unsigned()) {
                        top.fail("seeds", "must be an array of at least 3 non-negative integers");
                        break;
                    }
                    cfg.seeds.push_back(v.get<std::uint64_t>());
                }
            }
        }
        if (regression) top.fail("task", "benchmark supports classification only");
    } else {
        top.forbid("seeds", "is only valid for the benchmark command");
    }
    top.finish();

    if (cfg.method == "swag" && errors.empty()) {
        const std::size_t epochs = cfg.swag_epochs.value_or(cfg.optimizer.epochs);
        if (cfg.swag.snapshot_every == 0 && epochs < cfg.swag.rank)
            errors.push_back("swag.rank " + std::to_string(cfg.swag.rank) + " needs at least that many SWAG epochs, got " +
                             std::to_string(epochs));
    }
    if (!errors.empty()) throw ConfigError(errors);
    return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path, ConfigKind kind) {
    std::ifstream in(path);
    if (!in) throw ConfigError({"cannot read config file " + path.string()});
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError({path.string() + " is not valid JSON: " + e.what()});
    }
    return parse_run_config(doc, kind, path.parent_path());
}

} // namespace uqkit::cli
