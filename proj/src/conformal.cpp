#include "uqkit/conformal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Dense>

#include "uqkit/error.hpp"
#include "uqkit/prob.hpp"
#include "uqkit/rng.hpp"

namespace uqkit::conformal {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();
// Products like (n + 1) * 0.9 land a hair above an integer in floating point.
constexpr double rank_slack = 1e-9;

void check_probs(const Matrix& probs, const char* what) {
    require_normalized_rows(probs, 1e-6, what);
}

void check_labels(std::span<const int> labels, std::size_t k, std::size_t n) {
    if (labels.size() != n) {
        throw InvalidInput("validation targets and probability rows differ in length");
    }
    for (int y : labels) {
        if (y < 0 || static_cast<std::size_t>(y) >= k) {
            throw InvalidInput("label " + std::to_string(y) + " out of range");
        }
    }
}

void check_class_inputs(const Matrix& val_probs, std::span<const int> val_targets, const Matrix& test_probs) {
    if (val_probs.rows() == 0) throw InvalidInput("conformal calibration needs n >= 1");
    if (val_probs.cols() != test_probs.cols()) throw InvalidInput("validation and test class counts differ");
    check_probs(val_probs, "validation probabilities");
    check_probs(test_probs, "test probabilities");
    check_labels(val_targets, val_probs.cols(), val_probs.rows());
}

// Class indices by descending probability; ties keep the lower index first.
std::vector<std::size_t> descending_order(std::span<const double> probs) {
    std::vector<std::size_t> order(probs.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return probs[a] > probs[b]; });
    return order;
}

PredictionSet sorted(PredictionSet s) {
    std::sort(s.begin(), s.end());
    return s;
}

void check_same_length(std::size_t a, std::size_t b, const char* what) {
    if (a != b) throw InvalidInput(std::string(what) + ": length mismatch");
}

Interval make_interval(double lower, double upper) {
    if (lower > upper) {
        const double mid = 0.5 * (lower + upper);
        return {mid, mid, true};
    }
    return {lower, upper, false};
}

struct LeaveOutFits {
    std::vector<double> residuals;                 // R_i
    std::vector<std::vector<double>> test_preds;   // [i][j] = mu_{-split(i)}(x_j)
};

Dataset drop_rows(const Dataset& ds, const std::vector<bool>& held_out) {
    std::vector<std::size_t> keep;
    for (std::size_t r = 0; r < ds.size(); ++r)
        if (!held_out[r]) keep.push_back(r);
    return ds.subset(keep);
}

LeaveOutFits fit_held_out(const Trainer& trainer, const Dataset& train, const Matrix& test_inputs,
                          const std::vector<std::vector<std::size_t>>& groups, ResamplingOptions options) {
    if (train.task != Task::regression) {
        throw InvalidInput("jackknife/CV methods need a regression dataset");
    }
    if (test_inputs.cols() != train.dim()) {
        throw InvalidInput("test inputs have the wrong number of columns");
    }
    const std::size_t n = train.size();
    LeaveOutFits fits{std::vector<double>(n), std::vector<std::vector<double>>(n)};
    for_each_index(groups.size(), options.execution, [&](std::size_t g) {
        try {
            std::vector<bool> held(n, false);
            for (auto r : groups[g]) held[r] = true;
            const Dataset rest = drop_rows(train, held);
            const Predictor predict = trainer(rest.inputs, rest.targets, derive_seed(options.seed, g));
            const Matrix held_inputs = train.inputs.select_rows(groups[g]);
            const auto held_pred = predict(held_inputs);
            const auto test_pred = predict(test_inputs);
            if (held_pred.size() != groups[g].size() || test_pred.size() != test_inputs.rows()) {
                throw InvalidInput("predictor returned the wrong number of predictions");
            }
            for (std::size_t t = 0; t < groups[g].size(); ++t) {
                const std::size_t i = groups[g][t];
                fits.residuals[i] = std::abs(train.targets[i] - held_pred[t]);
                fits.test_preds[i] = test_pred;
            }
        } catch (const TrainerError&) {
            throw;
        } catch (const std::exception& e) {
            throw TrainerError(g, e.what());
        }
    });
    return fits;
}

std::vector<Interval> plus_intervals(const LeaveOutFits& fits, std::size_t m, ErrorLevel alpha) {
    const std::size_t n = fits.residuals.size();
    const std::size_t hi_rank = upper_rank(n, alpha);
    // floor(alpha (n + 1)) == n + 1 - ceil((1 - alpha)(n + 1))
    const std::size_t lo_rank = n + 1 >= hi_rank ? n + 1 - hi_rank : 0;
    std::vector<Interval> out(m);
    std::vector<double> lows(n), highs(n);
    for (std::size_t j = 0; j < m; ++j) {
        for (std::size_t i = 0; i < n; ++i) {
            lows[i] = fits.test_preds[i][j] - fits.residuals[i];
            highs[i] = fits.test_preds[i][j] + fits.residuals[i];
        }
        const double lower = lo_rank >= 1 ? kth_smallest(lows, lo_rank) : -inf;
        const double upper = hi_rank <= n ? kth_smallest(highs, hi_rank) : inf;
        out[j] = make_interval(lower, upper);
    }
    return out;
}

std::vector<std::vector<std::size_t>> singletons(std::size_t n) {
    std::vector<std::vector<std::size_t>> g(n);
    for (std::size_t i = 0; i < n; ++i) g[i] = {i};
    return g;
}

} // namespace

ErrorLevel::ErrorLevel(double alpha) : alpha_(alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw InvalidInput("alpha must lie strictly between 0 and 1");
    }
}

TrainerError::TrainerError(std::size_t index, const std::string& what)
    : std::runtime_error("trainer failed on held-out index " + std::to_string(index) + ": " + what), index_(index) {}

std::size_t upper_rank(std::size_t n, ErrorLevel alpha) {
    const double x = static_cast<double>(n + 1) * (1.0 - alpha.alpha());
    return static_cast<std::size_t>(std::ceil(x - rank_slack));
}

double conformal_quantile(std::span<const double> scores, ErrorLevel alpha) {
    if (scores.empty()) throw InvalidInput("conformal quantile of an empty score set");
    const std::size_t k = upper_rank(scores.size(), alpha);
    return k > scores.size() ? inf : kth_smallest(scores, k);
}

std::vector<PredictionSet> baseline_sets(const Matrix& val_probs, std::span<const int> val_targets,
                                         const Matrix& test_probs, ErrorLevel alpha) {
    check_class_inputs(val_probs, val_targets, test_probs);
    std::vector<double> scores(val_probs.rows());
    for (std::size_t i = 0; i < scores.size(); ++i) {
        scores[i] = 1.0 - val_probs(i, static_cast<std::size_t>(val_targets[i]));
    }
    const double q = conformal_quantile(scores, alpha);
    std::vector<PredictionSet> out(test_probs.rows());
    for (std::size_t i = 0; i < test_probs.rows(); ++i) {
        for (std::size_t c = 0; c < test_probs.cols(); ++c) {
            if (1.0 - test_probs(i, c) <= q) out[i].push_back(static_cast<int>(c));
        }
    }
    return out;
}

double aps_score(std::span<const double> probs, int label, double u) {
    const auto order = descending_order(probs);
    double above = 0.0;
    for (auto c : order) {
        if (static_cast<int>(c) == label) break;
        above += probs[c];
    }
    return above + u * probs[static_cast<std::size_t>(label)];
}

PredictionSet aps_set(std::span<const double> probs, double q) {
    const auto order = descending_order(probs);
    PredictionSet set;
    double mass = 0.0;
    for (auto c : order) {
        set.push_back(static_cast<int>(c));
        mass += probs[c];
        if (mass >= q) break;
    }
    return sorted(std::move(set));
}

PredictionSet aps_set_randomized(std::span<const double> probs, double q, double u) {
    const auto order = descending_order(probs);
    PredictionSet set;
    double above = 0.0;
    for (auto c : order) {
        if (above + probs[c] >= q) {
            if (u * probs[c] <= q - above) set.push_back(static_cast<int>(c));
            return sorted(std::move(set));
        }
        set.push_back(static_cast<int>(c));
        above += probs[c];
    }
    return sorted(std::move(set));
}

std::vector<PredictionSet> adaptive_sets(const Matrix& val_probs, std::span<const int> val_targets,
                                         const Matrix& test_probs, ErrorLevel alpha, ApsMode mode,
                                         std::uint64_t seed) {
    check_class_inputs(val_probs, val_targets, test_probs);
    Rng rng(seed);
    const bool randomized = mode == ApsMode::randomized;
    std::vector<double> scores(val_probs.rows());
    for (std::size_t i = 0; i < scores.size(); ++i) {
        const double u = randomized ? rng.uniform() : 1.0;
        scores[i] = aps_score(val_probs.row(i), val_targets[i], u);
    }
    const double q = conformal_quantile(scores, alpha);
    std::vector<PredictionSet> out(test_probs.rows());
    for (std::size_t i = 0; i < test_probs.rows(); ++i) {
        out[i] = randomized ? aps_set_randomized(test_probs.row(i), q, rng.uniform()) : aps_set(test_probs.row(i), q);
    }
    return out;
}

std::vector<Interval> cqr_interval(std::span<const double> val_lower, std::span<const double> val_upper,
                                   std::span<const double> val_targets, std::span<const double> test_lower,
                                   std::span<const double> test_upper, ErrorLevel alpha) {
    check_same_length(val_lower.size(), val_upper.size(), "cqr validation bounds");
    check_same_length(val_lower.size(), val_targets.size(), "cqr validation targets");
    check_same_length(test_lower.size(), test_upper.size(), "cqr test bounds");
    for (std::size_t i = 0; i < val_lower.size(); ++i) {
        if (val_lower[i] > val_upper[i]) throw InvalidInput("cqr: validation lower bound exceeds upper bound");
    }
    for (std::size_t i = 0; i < test_lower.size(); ++i) {
        if (test_lower[i] > test_upper[i]) throw InvalidInput("cqr: test lower bound exceeds upper bound");
    }
    std::vector<double> scores(val_targets.size());
    for (std::size_t i = 0; i < scores.size(); ++i) {
        scores[i] = std::max(val_lower[i] - val_targets[i], val_targets[i] - val_upper[i]);
    }
    const double q = conformal_quantile(scores, alpha);
    std::vector<Interval> out(test_lower.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = make_interval(test_lower[i] - q, test_upper[i] + q);
    }
    return out;
}

std::vector<Interval> scalar_score_interval(std::span<const double> val_means, std::span<const double> val_stds,
                                            std::span<const double> val_targets,
                                            std::span<const double> test_means,
                                            std::span<const double> test_stds, ErrorLevel alpha) {
    check_same_length(val_means.size(), val_stds.size(), "scalar-score validation");
    check_same_length(val_means.size(), val_targets.size(), "scalar-score validation targets");
    check_same_length(test_means.size(), test_stds.size(), "scalar-score test");
    for (auto stds : {val_stds, test_stds}) {
        for (double s : stds) {
            if (!(s > 0.0)) throw InvalidInput("scalar-score intervals need positive standard deviations");
        }
    }
    std::vector<double> scores(val_means.size());
    for (std::size_t i = 0; i < scores.size(); ++i) {
        scores[i] = std::abs(val_targets[i] - val_means[i]) / val_stds[i];
    }
    const double q = conformal_quantile(scores, alpha);
    std::vector<Interval> out(test_means.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = {test_means[i] - q * test_stds[i], test_means[i] + q * test_stds[i]};
    }
    return out;
}

std::vector<Interval> jackknife_plus(const Trainer& trainer, const Dataset& train, const Matrix& test_inputs,
                                     ErrorLevel alpha, ResamplingOptions options) {
    if (train.size() < 2) throw InvalidInput("jackknife+ needs n >= 2");
    const auto fits = fit_held_out(trainer, train, test_inputs, singletons(train.size()), options);
    return plus_intervals(fits, test_inputs.rows(), alpha);
}

std::vector<Interval> jackknife_minmax(const Trainer& trainer, const Dataset& train, const Matrix& test_inputs,
                                       ErrorLevel alpha, ResamplingOptions options) {
    if (train.size() < 2) throw InvalidInput("jackknife-minmax needs n >= 2");
    const auto fits = fit_held_out(trainer, train, test_inputs, singletons(train.size()), options);
    const double q = conformal_quantile(fits.residuals, alpha);
    std::vector<Interval> out(test_inputs.rows());
    for (std::size_t j = 0; j < out.size(); ++j) {
        double lo = inf, hi = -inf;
        for (const auto& preds : fits.test_preds) {
            lo = std::min(lo, preds[j]);
            hi = std::max(hi, preds[j]);
        }
        out[j] = make_interval(lo - q, hi + q);
    }
    return out;
}

std::vector<std::vector<std::size_t>> cv_folds(std::size_t n, std::size_t folds, std::uint64_t seed) {
    if (folds < 2 || folds > n) {
        throw InvalidInput("CV+ needs 2 <= folds <= n (got folds=" + std::to_string(folds) + ", n=" + std::to_string(n) + ")");
    }
    Rng rng(seed);
    const auto perm = rng.permutation(n);
    const std::size_t base = n / folds;
    const std::size_t extra = n % folds;
    std::vector<std::vector<std::size_t>> out(folds);
    std::size_t pos = 0;
    for (std::size_t f = 0; f < folds; ++f) {
        const std::size_t len = base + (f < extra ? 1 : 0);
        out[f].assign(perm.begin() + static_cast<std::ptrdiff_t>(pos), perm.begin() + static_cast<std::ptrdiff_t>(pos + len));
        pos += len;
    }
    return out;
}

std::vector<Interval> cv_plus(const Trainer& trainer, const Dataset& train, std::size_t folds,
                              const Matrix& test_inputs, ErrorLevel alpha, ResamplingOptions options) {
    const auto groups = cv_folds(train.size(), folds, options.seed);
    const auto fits = fit_held_out(trainer, train, test_inputs, groups, options);
    return plus_intervals(fits, test_inputs.rows(), alpha);
}

Trainer mean_trainer() {
    return [](const Matrix&, std::span<const double> targets, std::uint64_t) -> Predictor {
        if (targets.empty()) throw InvalidInput("mean trainer needs at least one target");
        const double mu = std::accumulate(targets.begin(), targets.end(), 0.0) / static_cast<double>(targets.size());
        return [mu](const Matrix& inputs) { return std::vector<double>(inputs.rows(), mu); };
    };
}

Trainer ridge_trainer(double penalty) {
    if (!(penalty >= 0.0)) throw InvalidInput("ridge penalty must be non-negative");
    return [penalty](const Matrix& inputs, std::span<const double> targets, std::uint64_t) -> Predictor {
        const auto n = static_cast<Eigen::Index>(inputs.rows());
        const auto d = static_cast<Eigen::Index>(inputs.cols());
        Eigen::MatrixXd x(n, d + 1);
        Eigen::VectorXd y(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = 0; j < d; ++j) x(i, j) = inputs(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
            x(i, d) = 1.0;
            y(i) = targets[static_cast<std::size_t>(i)];
        }
        Eigen::MatrixXd gram = x.transpose() * x;
        for (Eigen::Index j = 0; j < d; ++j) gram(j, j) += penalty;
        const Eigen::VectorXd w = gram.ldlt().solve(x.transpose() * y);
        return [w, d](const Matrix& test) {
            std::vector<double> out(test.rows());
            for (std::size_t i = 0; i < test.rows(); ++i) {
                double s = w(d);
                for (Eigen::Index j = 0; j < d; ++j) s += w(j) * test(i, static_cast<std::size_t>(j));
                out[i] = s;
            }
            return out;
        };
    };
}

} // namespace uqkit::conformal
