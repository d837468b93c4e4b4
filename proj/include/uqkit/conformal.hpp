#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "uqkit/data.hpp"
#include "uqkit/execution.hpp"
#include "uqkit/interval.hpp"
#include "uqkit/matrix.hpp"

namespace uqkit::conformal {

/// Miscoverage level alpha, strictly inside (0, 1).
class ErrorLevel {
public:
    explicit ErrorLevel(double alpha);
    double alpha() const noexcept { return alpha_; }

private:
    double alpha_;
};

/// Sorted class labels.
using PredictionSet = std::vector<int>;

/// ceil((n + 1)(1 - alpha)); may exceed n.
std::size_t upper_rank(std::size_t n, ErrorLevel alpha);

/// The upper_rank-th smallest score, or +inf when that rank exceeds n.
double conformal_quantile(std::span<const double> scores, ErrorLevel alpha);

std::vector<PredictionSet> baseline_sets(const Matrix& val_probs, std::span<const int> val_targets,
                                         const Matrix& test_probs, ErrorLevel alpha);

enum class ApsMode { deterministic, randomized };

/// APS score of `label`: probability mass ranked strictly above it plus u * p_label.
double aps_score(std::span<const double> probs, int label, double u);

/// Smallest prefix of classes in descending probability whose mass reaches q
/// (ties in probability keep the lower class first). All classes if it never does.
PredictionSet aps_set(std::span<const double> probs, double q);

/// Randomized variant: the boundary class is kept only if u * p_boundary <= q - mass_above.
PredictionSet aps_set_randomized(std::span<const double> probs, double q, double u);

std::vector<PredictionSet> adaptive_sets(const Matrix& val_probs, std::span<const int> val_targets,
                                         const Matrix& test_probs, ErrorLevel alpha,
                                         ApsMode mode = ApsMode::deterministic, std::uint64_t seed = 0);

/// Conformalized quantile regression. Bounds that would invert collapse to their midpoint.
std::vector<Interval> cqr_interval(std::span<const double> val_lower, std::span<const double> val_upper,
                                   std::span<const double> val_targets, std::span<const double> test_lower,
                                   std::span<const double> test_upper, ErrorLevel alpha);

/// Normalized-residual intervals mu +- q sigma.
std::vector<Interval> scalar_score_interval(std::span<const double> val_means, std::span<const double> val_stds,
                                            std::span<const double> val_targets,
                                            std::span<const double> test_means,
                                            std::span<const double> test_stds, ErrorLevel alpha);

using Predictor = std::function<std::vector<double>(const Matrix& inputs)>;
/// Fits a predictor of real targets. Must be deterministic in (inputs, targets, seed).
using Trainer = std::function<Predictor(const Matrix& inputs, std::span<const double> targets, std::uint64_t seed)>;

/// Raised when a leave-out fit throws; `index` is the held-out row (jackknife) or fold (CV+).
class TrainerError : public std::runtime_error {
public:
    TrainerError(std::size_t index, const std::string& what);
    std::size_t index() const noexcept { return index_; }

private:
    std::size_t index_;
};

struct ResamplingOptions {
    std::uint64_t seed = 0;
    Execution execution = Execution::parallel;
};

std::vector<Interval> jackknife_plus(const Trainer& trainer, const Dataset& train, const Matrix& test_inputs,
                                     ErrorLevel alpha, ResamplingOptions options = {});
std::vector<Interval> jackknife_minmax(const Trainer& trainer, const Dataset& train, const Matrix& test_inputs,
                                       ErrorLevel alpha, ResamplingOptions options = {});
std::vector<Interval> cv_plus(const Trainer& trainer, const Dataset& train, std::size_t folds,
                              const Matrix& test_inputs, ErrorLevel alpha, ResamplingOptions options = {});

/// Seeded permutation cut into contiguous chunks; the first n % K folds get one extra row.
std::vector<std::vector<std::size_t>> cv_folds(std::size_t n, std::size_t folds, std::uint64_t seed);

/// Predicts the training-target mean everywhere.
Trainer mean_trainer();
/// Ridge regression with an unpenalized intercept.
Trainer ridge_trainer(double penalty);

} // namespace uqkit::conformal
