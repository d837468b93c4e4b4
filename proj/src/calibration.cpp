#include "uqkit/calibration.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "uqkit/error.hpp"
#include "uqkit/prob.hpp"

namespace uqkit::calibration {

namespace {

constexpr double beta_lo = 1.0 / t_max;
constexpr double beta_hi = 1.0 / t_min;
constexpr double golden_tol = 1e-6;
constexpr std::size_t golden_cap = 200;
constexpr std::size_t adam_steps = 300;
constexpr double adam_lr = 0.1;

void check_logits(const Matrix& logits) {
    if (logits.cols() < 2) throw InvalidInput("logits need at least two classes");
    if (!logits.all_finite()) throw InvalidInput("logits must be finite");
}

void check_targets(const Matrix& logits, std::span<const int> targets) {
    if (logits.rows() == 0) throw InvalidInput("calibration set is empty");
    if (targets.size() != logits.rows()) throw InvalidInput("targets length does not match logits rows");
    for (int y : targets)
        if (y < 0 || static_cast<std::size_t>(y) >= logits.cols())
            throw InvalidInput("target label " + std::to_string(y) + " out of range");
}

// Mean NLL at inverse temperature beta, and its derivative in beta.
struct BetaEval {
    double nll;
    double slope;
};

BetaEval eval_beta(const Matrix& logits, std::span<const int> targets, double beta) {
    double nll = 0.0, slope = 0.0;
    const std::size_t k = logits.cols();
    for (std::size_t i = 0; i < logits.rows(); ++i) {
        const auto z = logits.row(i);
        const double m = *std::max_element(z.begin(), z.end());
        double denom = 0.0, weighted = 0.0;
        for (std::size_t c = 0; c < k; ++c) {
            const double e = std::exp(beta * (z[c] - m));
            denom += e;
            weighted += e * z[c];
        }
        const double zy = z[static_cast<std::size_t>(targets[i])];
        nll += beta * (m - zy) + std::log(denom);
        slope += weighted / denom - zy;
    }
    const auto n = static_cast<double>(logits.rows());
    return {nll / n, slope / n};
}

bool all_rows_constant(const Matrix& logits) {
    for (std::size_t i = 0; i < logits.rows(); ++i) {
        const auto z = logits.row(i);
        if (std::any_of(z.begin(), z.end(), [&](double v) { return v != z[0]; })) return false;
    }
    return true;
}

std::pair<double, std::size_t> golden_section(const Matrix& logits, std::span<const int> targets) {
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = beta_lo, b = beta_hi;
    double c = b - inv_phi * (b - a), d = a + inv_phi * (b - a);
    double fc = eval_beta(logits, targets, c).nll, fd = eval_beta(logits, targets, d).nll;
    std::size_t it = 0;
    while (b - a > golden_tol && it < golden_cap) {
        ++it;
        if (fc <= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = eval_beta(logits, targets, c).nll;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = eval_beta(logits, targets, d).nll;
        }
    }
    return {(a + b) / 2.0, it};
}

// Adam on log t, full batch.
std::pair<double, std::size_t> adam_log_t(const Matrix& logits, std::span<const int> targets) {
    const double lo = std::log(t_min), hi = std::log(t_max);
    double log_t = 0.0, m = 0.0, v = 0.0;
    const double b1 = 0.9, b2 = 0.999, eps = 1e-8;
    for (std::size_t step = 1; step <= adam_steps; ++step) {
        const double beta = std::exp(-log_t);
        const double g = eval_beta(logits, targets, beta).slope * -beta;
        m = b1 * m + (1 - b1) * g;
        v = b2 * v + (1 - b2) * g * g;
        const double mhat = m / (1 - std::pow(b1, static_cast<double>(step)));
        const double vhat = v / (1 - std::pow(b2, static_cast<double>(step)));
        log_t = std::clamp(log_t - adam_lr * mhat / (std::sqrt(vhat) + eps), lo, hi);
    }
    return {std::exp(-log_t), adam_steps};
}

} // namespace

Temperature::Temperature(double t) : t_(t) {
    if (!(t >= t_min && t <= t_max))
        throw InvalidInput("temperature must lie in [0.01, 100], got " + std::to_string(t));
}

Matrix apply_temperature(const Matrix& logits, Temperature t) {
    check_logits(logits);
    return softmax_rows(logits, t.value());
}

double temperature_nll(const Matrix& logits, std::span<const int> targets, double t) {
    check_logits(logits);
    check_targets(logits, targets);
    return eval_beta(logits, targets, 1.0 / t).nll;
}

TemperatureFit fit_temperature(const Matrix& logits, std::span<const int> targets, TemperatureOptimizer optimizer) {
    check_logits(logits);
    check_targets(logits, targets);
    TemperatureFit fit;
    fit.status.nll_before = eval_beta(logits, targets, 1.0).nll;
    if (all_rows_constant(logits)) {
        fit.status.nll_after = fit.status.nll_before;
        fit.status.warning = "logits are constant within every row; temperature left at 1";
        return fit;
    }
    const auto [beta_star, iterations] = optimizer == TemperatureOptimizer::golden_section
                                             ? golden_section(logits, targets)
                                             : adam_log_t(logits, targets);
    fit.status.iterations = iterations;

    // The search interval ends and t = 1 are checked explicitly so the exact
    // boundary is returned for monotone problems and t = 1 is never beaten.
    const std::array<double, 4> candidates{1.0, beta_star, beta_lo, beta_hi};
    double best_beta = 1.0, best = fit.status.nll_before;
    for (double b : candidates) {
        const double f = eval_beta(logits, targets, b).nll;
        if (f < best) {
            best = f;
            best_beta = b;
        }
    }
    const double t = std::clamp(1.0 / best_beta, t_min, t_max);
    fit.t = Temperature(t);
    fit.status.nll_after = best;
    fit.status.at_boundary = best_beta - beta_lo <= golden_tol || beta_hi - best_beta <= golden_tol;
    if (fit.status.at_boundary) fit.status.warning = "temperature hit the search bound " + std::to_string(t);
    return fit;
}

VarianceFit fit_variance_scale(std::span<const double> means, std::span<const double> variances,
                               std::span<const double> targets) {
    const std::size_t n = means.size();
    if (n == 0) throw InvalidInput("calibration set is empty");
    if (variances.size() != n || targets.size() != n)
        throw InvalidInput("means, variances and targets must have equal length");
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!(variances[i] > 0.0) || !std::isfinite(variances[i])) throw InvalidInput("variances must be positive");
        if (!std::isfinite(means[i]) || !std::isfinite(targets[i])) throw InvalidInput("means and targets must be finite");
        const double r = targets[i] - means[i];
        acc += r * r / variances[i];
    }
    VarianceFit fit{acc / static_cast<double>(n), std::nullopt};
    if (fit.s <= 0.0) {
        fit.s = 1e-12;
        fit.warning = "all residuals are zero; variance scale clamped to 1e-12";
    }
    return fit;
}

std::vector<double> apply_variance_scale(std::span<const double> variances, double s) {
    if (!(s > 0.0)) throw InvalidInput("variance scale must be positive");
    std::vector<double> out(variances.begin(), variances.end());
    for (double& v : out) v *= s;
    return out;
}

std::vector<double> calibrated_entropy(const Matrix& logits, Temperature t) {
    const Matrix p = apply_temperature(logits, t);
    std::vector<double> h(p.rows());
    for (std::size_t i = 0; i < p.rows(); ++i) h[i] = entropy(p.row(i));
    return h;
}

} // namespace uqkit::calibration
