#include "uqkit/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "uqkit/error.hpp"
#include "uqkit/prob.hpp"

namespace uqkit::metrics {

namespace {

void check_targets(const Matrix& probs, std::span<const int> targets) {
    if (probs.rows() != targets.size()) {
        throw InvalidInput("probability rows and targets differ in length");
    }
    if (probs.rows() == 0) {
        throw InvalidInput("metrics need at least one row");
    }
    for (int y : targets) {
        if (y < 0 || static_cast<std::size_t>(y) >= probs.cols()) {
            throw InvalidInput("label " + std::to_string(y) + " out of range");
        }
    }
}

std::size_t confidence_bin(double conf, std::size_t n_bins) {
    const auto b_count = static_cast<double>(n_bins);
    auto b = static_cast<std::size_t>(std::max(0.0, std::ceil(conf * b_count) - 1.0));
    b = std::min(b, n_bins - 1);
    // Settle rounding at the edges against the same edge values a direct comparison would use.
    while (b > 0 && conf <= static_cast<double>(b) / b_count) --b;
    while (b + 1 < n_bins && conf > static_cast<double>(b + 1) / b_count) ++b;
    return b;
}

} // namespace

double nll_classification(const Matrix& probs, std::span<const int> targets) {
    check_targets(probs, targets);
    double total = 0.0;
    for (std::size_t i = 0; i < probs.rows(); ++i) {
        total -= std::log(std::max(probs(i, static_cast<std::size_t>(targets[i])), probability_floor));
    }
    return total / static_cast<double>(probs.rows());
}

double ece(const Matrix& probs, std::span<const int> targets, std::size_t n_bins) {
    if (n_bins == 0) {
        throw InvalidInput("ece needs at least one bin");
    }
    check_targets(probs, targets);
    std::vector<double> conf_sum(n_bins, 0.0), correct(n_bins, 0.0);
    std::vector<std::size_t> count(n_bins, 0);
    for (std::size_t i = 0; i < probs.rows(); ++i) {
        const auto row = probs.row(i);
        const std::size_t pred = argmax(row);
        const double conf = row[pred];
        const std::size_t b = confidence_bin(conf, n_bins);
        conf_sum[b] += conf;
        correct[b] += static_cast<std::size_t>(targets[i]) == pred ? 1.0 : 0.0;
        ++count[b];
    }
    double total = 0.0;
    const auto n = static_cast<double>(probs.rows());
    for (std::size_t b = 0; b < n_bins; ++b) {
        if (count[b] == 0) continue;
        const auto nb = static_cast<double>(count[b]);
        total += (nb / n) * std::abs(correct[b] / nb - conf_sum[b] / nb);
    }
    return total;
}

double brier(const Matrix& probs, std::span<const int> targets) {
    check_targets(probs, targets);
    double total = 0.0;
    for (std::size_t i = 0; i < probs.rows(); ++i) {
        for (std::size_t k = 0; k < probs.cols(); ++k) {
            const double d = probs(i, k) - (static_cast<std::size_t>(targets[i]) == k ? 1.0 : 0.0);
            total += d * d;
        }
    }
    return total / static_cast<double>(probs.rows());
}

double accuracy(const Matrix& probs, std::span<const int> targets) {
    check_targets(probs, targets);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < probs.rows(); ++i) {
        hits += argmax(probs.row(i)) == static_cast<std::size_t>(targets[i]) ? 1 : 0;
    }
    return static_cast<double>(hits) / static_cast<double>(probs.rows());
}

double gaussian_nll(std::span<const double> means, std::span<const double> variances, std::span<const double> targets) {
    if (means.size() != targets.size() || variances.size() != targets.size() || targets.empty()) {
        throw InvalidInput("gaussian_nll: length mismatch or empty input");
    }
    double total = 0.0;
    for (std::size_t i = 0; i < targets.size(); ++i) {
        if (!(variances[i] > 0.0)) throw InvalidInput("gaussian_nll: variances must be positive");
        const double r = targets[i] - means[i];
        total += 0.5 * (std::log(2.0 * std::numbers::pi * variances[i]) + r * r / variances[i]);
    }
    return total / static_cast<double>(targets.size());
}

IntervalMetrics interval_metrics(std::span<const Interval> intervals, std::span<const double> targets) {
    if (intervals.size() != targets.size() || targets.empty()) {
        throw InvalidInput("interval_metrics: length mismatch or empty input");
    }
    std::size_t covered = 0;
    double width = 0.0;
    for (std::size_t i = 0; i < targets.size(); ++i) {
        covered += intervals[i].contains(targets[i]) ? 1 : 0;
        width += intervals[i].width();
    }
    const auto n = static_cast<double>(targets.size());
    return {static_cast<double>(covered) / n, width / n};
}

IntervalMetrics set_metrics(std::span<const std::vector<int>> sets, std::span<const int> targets) {
    if (sets.size() != targets.size() || targets.empty()) {
        throw InvalidInput("set_metrics: length mismatch or empty input");
    }
    std::size_t covered = 0;
    double size = 0.0;
    for (std::size_t i = 0; i < targets.size(); ++i) {
        covered += std::find(sets[i].begin(), sets[i].end(), targets[i]) != sets[i].end() ? 1 : 0;
        size += static_cast<double>(sets[i].size());
    }
    const auto n = static_cast<double>(targets.size());
    return {static_cast<double>(covered) / n, size / n};
}

Report classification_report(const Matrix& probs, std::span<const int> targets, std::size_t n_bins) {
    Report r;
    r.nll = nll_classification(probs, targets);
    r.ece = ece(probs, targets, n_bins);
    r.brier = brier(probs, targets);
    r.accuracy = accuracy(probs, targets);
    r.n = probs.rows();
    r.bins = n_bins;
    return r;
}

nlohmann::ordered_json to_json(const Report& report) {
    const auto opt = [](const std::optional<double>& v) -> nlohmann::ordered_json {
        return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
    };
    nlohmann::ordered_json j;
    j["nll"] = opt(report.nll);
    j["ece"] = opt(report.ece);
    j["brier"] = opt(report.brier);
    j["accuracy"] = opt(report.accuracy);
    j["coverage"] = opt(report.coverage);
    j["mean_width"] = opt(report.mean_width);
    j["n"] = report.n;
    j["bins"] = report.bins;
    return j;
}

} // namespace uqkit::metrics
