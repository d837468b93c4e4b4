#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "uqkit/conformal.hpp"
#include "uqkit/execution.hpp"
#include "uqkit/interval.hpp"
#include "uqkit/matrix.hpp"
#include "uqkit/mlp.hpp"
#include "uqkit/posterior.hpp"

namespace uqkit {

struct PredictiveConfig {
    /// Posterior draws; unset means default_samples(state).
    std::optional<std::size_t> n_samples;
    std::uint64_t seed = 0;
    Execution execution = Execution::parallel;
};

/// 1 for MAP, M for an ensemble, 30 otherwise. A MAP state is evaluated once for
/// every statistic; only credible intervals use n_samples observation draws with it.
std::size_t default_samples(const PosteriorState& state);
std::size_t resolve_samples(const PosteriorState& state, const PredictiveConfig& pcfg);

/// (1/S) sum_s softmax(f(theta_s, x)).
Matrix predictive_mean_classification(const PosteriorState& state, const MlpConfig& cfg, const Matrix& inputs,
                                      const PredictiveConfig& pcfg);

std::vector<double> predictive_entropy(const PosteriorState& state, const MlpConfig& cfg, const Matrix& inputs,
                                       const PredictiveConfig& pcfg);

struct RegressionMoments {
    std::vector<double> mean;
    std::vector<double> aleatoric;  // E_s[sigma_s^2]
    std::vector<double> epistemic;  // Var_s[mu_s], divided by S
    std::vector<double> total;
};

RegressionMoments predictive_moments_regression(const PosteriorState& state, const MlpConfig& cfg,
                                                const Matrix& inputs, const PredictiveConfig& pcfg);

struct CredibleIntervals {
    std::vector<Interval> intervals;
    std::optional<std::string> warning;
};

/// One observation y_s ~ N(mu_s, sigma_s^2) per posterior draw, then the
/// ceil(q S)-th smallest for q = alpha/2 and 1 - alpha/2. Observation noise for
/// input i comes from its own child stream.
CredibleIntervals credible_interval_regression(const PosteriorState& state, const MlpConfig& cfg,
                                               const Matrix& inputs, conformal::ErrorLevel alpha,
                                               const PredictiveConfig& pcfg);

} // namespace uqkit
