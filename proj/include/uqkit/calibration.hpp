#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "uqkit/matrix.hpp"

namespace uqkit::calibration {

inline constexpr double t_min = 0.01;
inline constexpr double t_max = 100.0;

class Temperature {
public:
    /// Throws InvalidInput outside [t_min, t_max].
    explicit Temperature(double t);
    double value() const noexcept { return t_; }

private:
    double t_;
};

/// Row-wise softmax(logits / t). Logits must be finite with at least two columns.
Matrix apply_temperature(const Matrix& logits, Temperature t);

/// Mean NLL of the tempered probabilities.
double temperature_nll(const Matrix& logits, std::span<const int> targets, double t);

enum class TemperatureOptimizer { golden_section, adam };

struct FitStatus {
    std::size_t iterations = 0;
    double nll_before = 0.0;  // at t = 1
    double nll_after = 0.0;
    bool at_boundary = false;
    std::optional<std::string> warning;
};

struct TemperatureFit {
    Temperature t{1.0};
    FitStatus status;
};

/// Minimizes calibration NLL over t in [t_min, t_max]. The result never scores
/// worse than t = 1. Rows whose logits are all equal carry no signal; if every
/// row is like that the fit returns t = 1 with a warning.
TemperatureFit fit_temperature(const Matrix& logits, std::span<const int> targets,
                               TemperatureOptimizer optimizer = TemperatureOptimizer::golden_section);

struct VarianceFit {
    double s = 1.0;
    std::optional<std::string> warning;
};

/// s = mean((y - mu)^2 / sigma^2), the Gaussian-NLL-optimal variance multiplier.
VarianceFit fit_variance_scale(std::span<const double> means, std::span<const double> variances,
                               std::span<const double> targets);

std::vector<double> apply_variance_scale(std::span<const double> variances, double s);

/// Natural-log entropy of each tempered row.
std::vector<double> calibrated_entropy(const Matrix& logits, Temperature t);

} // namespace uqkit::calibration
