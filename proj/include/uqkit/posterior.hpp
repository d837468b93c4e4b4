#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "uqkit/data.hpp"
#include "uqkit/execution.hpp"
#include "uqkit/matrix.hpp"
#include "uqkit/mlp.hpp"
#include "uqkit/optim.hpp"
#include "uqkit/rng.hpp"

namespace uqkit {

struct MapState {
    ParamVector theta;
};

struct EnsembleState {
    std::vector<ParamVector> members;
};

inline constexpr double swag_variance_floor = 1e-30;

struct SwagState {
    ParamVector mean;
    ParamVector diag_second_moment;
    Matrix deviations;  // P x rank, oldest snapshot first
    std::size_t rank = 0;
    std::size_t snapshots = 0;

    /// second moment - mean^2, clamped at swag_variance_floor.
    std::vector<double> diag_variance() const;
};

struct LaplaceState {
    ParamVector mode;
    std::vector<double> diag_precision;
};

inline constexpr double advi_log_std_floor = -30.0;

struct AdviState {
    ParamVector mean;
    std::vector<double> log_std;
};

using PosteriorState = std::variant<MapState, EnsembleState, SwagState, LaplaceState, AdviState>;

std::string_view method_name(const PosteriorState& state);
/// Length of the parameter vectors held by the state.
std::size_t param_count(const PosteriorState& state);

struct TrainStatus {
    bool diverged = false;
    std::string message;
};

struct MapResult {
    MapState state;
    double initial_loss = 0.0;
    std::vector<double> trace;  // full-data objective after each epoch
    TrainStatus status;
};

/// Minimizes mean NLL + (weight_decay / 2) |theta|^2 from init_params(cfg).
/// A non-finite loss or parameter stops training and keeps the last finite theta.
MapResult map_fit(const MlpConfig& cfg, const Dataset& train, const OptimConfig& opt);
/// As above, starting from `start`.
MapResult map_fit(const MlpConfig& cfg, const Dataset& train, const OptimConfig& opt, ParamVector start);

/// Full-data objective used by map_fit.
double map_objective(const MlpConfig& cfg, const Dataset& data, std::span<const double> theta, double weight_decay);

struct EnsembleResult {
    EnsembleState state;
    std::vector<std::vector<double>> traces;
    TrainStatus status;
    std::optional<std::size_t> diverged_member;  // lowest index
};

/// Member m trains with init_seed and optimizer seed replaced by their (seed, m) children.
EnsembleResult ensemble_fit(const MlpConfig& cfg, const Dataset& train, const OptimConfig& opt, std::size_t members,
                            Execution exec = Execution::parallel);

/// Running first and second moments of iterates plus the last `rank` deviations.
class SwagAccumulator {
public:
    SwagAccumulator(std::size_t size, std::size_t rank);
    void add(std::span<const double> theta);
    std::size_t count() const noexcept { return count_; }
    /// Requires count() >= rank.
    SwagState state() const;

private:
    std::size_t rank_;
    std::size_t count_ = 0;
    std::vector<double> mean_, sq_mean_;
    std::deque<std::vector<double>> deviations_;
};

struct SwagConfig {
    std::size_t rank = 20;
    /// Steps between snapshots; 0 means once per epoch.
    std::size_t snapshot_every = 0;
    /// Overrides the optimizer algorithm for the SWAG phase.
    std::optional<Algorithm> algorithm;
};

struct SwagResult {
    SwagState state;
    std::vector<double> trace;
    TrainStatus status;
};

/// Continues optimization from `start` for opt.epochs, snapshotting every
/// snapshot_every steps. Throws InvalidInput if that yields fewer than rank snapshots.
SwagResult swag_fit(const MapState& start, const MlpConfig& cfg, const Dataset& train, const OptimConfig& opt,
                    const SwagConfig& swag);

/// mean + sigma z1 / sqrt(2) + D z2 / sqrt(2 (K - 1)); with K = 1, mean + sigma z1.
/// Variances at the floor are sampled as exactly zero.
ParamVector swag_sample(const SwagState& state, Rng& rng);

struct LaplaceResult {
    LaplaceState state;
    std::optional<std::string> warning;
};

/// Per-example diagonal of J^T Lambda J at theta, summed over the data.
std::vector<double> ggn_diagonal(const MlpConfig& cfg, const Dataset& data, std::span<const double> theta,
                                 Execution exec = Execution::parallel);

/// diag precision = prior_precision + ggn_diagonal at the MAP mode.
LaplaceResult laplace_fit(const MapState& start, const MlpConfig& cfg, const Dataset& train, double prior_precision,
                          Execution exec = Execution::parallel);

struct AdviConfig {
    std::size_t mc_samples = 1;
    double prior_precision = 1.0;
    double init_log_std = -2.3;
};

struct AdviResult {
    AdviState state;
    double initial_elbo = 0.0;
    std::vector<double> trace;  // per-datum ELBO, averaged over each epoch's steps
    double final_elbo = 0.0;
    TrainStatus status;
};

/// Per-datum negative ELBO of one batch, mean NLL + KL / n_total, averaged over the
/// rows of `noise` (each a standard-normal draw of length P). The gradient is
/// with respect to [mean, log_std] concatenated.
ad::ValueAndGrad advi_objective(const MlpConfig& cfg, const Matrix& inputs, std::span<const int> labels,
                                std::span<const double> targets, std::size_t n_total, double prior_precision,
                                std::span<const double> mean, std::span<const double> log_std, const Matrix& noise);

/// KL(N(mean, diag e^{2 log_std}) || N(0, I / prior_precision)).
double advi_kl(std::span<const double> mean, std::span<const double> log_std, double prior_precision);

/// Full-data per-datum ELBO estimate with `draws` samples from `rng`.
double advi_elbo(const MlpConfig& cfg, const Dataset& data, const AdviState& state, double prior_precision,
                 std::size_t draws, Rng& rng);

AdviResult advi_fit(const MlpConfig& cfg, const Dataset& train, const OptimConfig& opt, const AdviConfig& advi);

/// Map repeats theta, ensembles cycle members, the Gaussian states draw.
std::vector<ParamVector> posterior_sample(const PosteriorState& state, Rng& rng, std::size_t n);

} // namespace uqkit
