#pragma once

#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "uqkit/cli/config.hpp"
#include "uqkit/conformal.hpp"
#include "uqkit/csv.hpp"
#include "uqkit/metrics.hpp"
#include "uqkit/serialize.hpp"

namespace uqkit::cli {

Dataset load_dataset(const RunConfig& cfg);
MlpConfig model_config(const RunConfig& cfg, const Dataset& data);

struct FittedPosterior {
    PosteriorState state;
    CsvTable trace;
    TrainStatus status;
    std::vector<std::string> warnings;
};

/// Trains cfg.method on `train`; MAP-based methods start from a MAP fit.
FittedPosterior fit_posterior(const RunConfig& cfg, const MlpConfig& model, const Dataset& train);

struct Evaluation {
    metrics::Report report;
    CsvTable predictions;
    std::optional<std::vector<conformal::PredictionSet>> sets;
    std::optional<double> temperature;
    std::optional<double> variance_scale;
    std::vector<std::string> warnings;
};

/// Predictive statistics on calib and test, optional calibration fitted on calib,
/// optional conformal step with calib as the validation set, metrics on test.
Evaluation evaluate_posterior(const RunConfig& cfg, const MlpConfig& model, const PosteriorState& state,
                              const Dataset& calib, const Dataset& test);

struct TrainOutcome {
    SavedPosterior saved;
    FittedPosterior fit;
    Evaluation evaluation;
    nlohmann::ordered_json summary;
};

TrainOutcome run_training(const RunConfig& cfg);

struct BenchmarkRun {
    std::uint64_t seed = 0;
    metrics::Report baseline;
    metrics::Report treated;
    double temperature = 1.0;
};

struct Tally {
    std::size_t wins = 0;
    std::size_t losses = 0;
    std::size_t ties = 0;
};

inline constexpr const char* benchmark_metrics[] = {"nll", "ece", "brier", "accuracy"};

struct BenchmarkResult {
    std::vector<BenchmarkRun> runs;
    std::map<std::string, Tally> tally;  // keyed by benchmark_metrics
};

/// Per seed: MAP baseline against SWAG continued from that MAP plus temperature
/// scaling, both scored on the same test split. Seeds run concurrently.
BenchmarkResult run_benchmark(const RunConfig& cfg, Execution exec = Execution::parallel);
nlohmann::ordered_json to_json(const BenchmarkResult& result);

/// Sets as text cells: labels joined by ';'.
std::string format_set(const conformal::PredictionSet& set);

} // namespace uqkit::cli
