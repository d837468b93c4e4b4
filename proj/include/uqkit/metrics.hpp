#pragma once

#include <cstddef>
#include <optional>
#include <span>

#include <nlohmann/json.hpp>

#include "uqkit/interval.hpp"
#include "uqkit/matrix.hpp"

namespace uqkit::metrics {

inline constexpr std::size_t default_bins = 15;
/// Probabilities are floored here before taking logs.
inline constexpr double probability_floor = 1e-300;

/// Mean negative log-likelihood -(1/n) sum ln p_i[y_i].
double nll_classification(const Matrix& probs, std::span<const int> targets);

/// Equal-width top-label ECE. Bin b covers (b/B, (b+1)/B]; confidence 0 lands in bin 0.
double ece(const Matrix& probs, std::span<const int> targets, std::size_t n_bins = default_bins);

/// Multiclass Brier score: (1/n) sum_i sum_k (p_ik - [y_i = k])^2.
double brier(const Matrix& probs, std::span<const int> targets);

/// Fraction of rows whose argmax (lowest index on ties) equals the target.
double accuracy(const Matrix& probs, std::span<const int> targets);

/// Mean Gaussian negative log-likelihood of targets under N(mean, variance).
double gaussian_nll(std::span<const double> means, std::span<const double> variances, std::span<const double> targets);

struct IntervalMetrics {
    double coverage = 0.0;
    double mean_width = 0.0;
};

/// Closed-interval coverage and mean width.
IntervalMetrics interval_metrics(std::span<const Interval> intervals, std::span<const double> targets);

/// Coverage of label sets and their mean size.
IntervalMetrics set_metrics(std::span<const std::vector<int>> sets, std::span<const int> targets);

struct Report {
    std::optional<double> nll;
    std::optional<double> ece;
    std::optional<double> brier;
    std::optional<double> accuracy;
    std::optional<double> coverage;
    std::optional<double> mean_width;
    std::size_t n = 0;
    std::size_t bins = default_bins;
};

Report classification_report(const Matrix& probs, std::span<const int> targets, std::size_t n_bins = default_bins);

/// Field names and order are fixed: nll, ece, brier, accuracy, coverage, mean_width, n, bins.
/// Absent values serialize as null.
nlohmann::ordered_json to_json(const Report& report);

} // namespace uqkit::metrics
