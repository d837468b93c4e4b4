#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "uqkit/calibration.hpp"
#include "uqkit/conformal.hpp"
#include "uqkit/data.hpp"
#include "uqkit/error.hpp"
#include "uqkit/mlp.hpp"
#include "uqkit/optim.hpp"
#include "uqkit/posterior.hpp"

namespace uqkit::cli {

/// Every schema violation found in a config document, reported together.
class ConfigError : public InvalidInput {
public:
    explicit ConfigError(std::vector<std::string> problems);
    const std::vector<std::string>& problems() const noexcept { return problems_; }

private:
    std::vector<std::string> problems_;
};

struct SynthSpec {
    std::string name = "two_moons";  // two_moons | gaussian_blobs | sine
    std::size_t n = 600;
    double noise = 0.1;
    std::size_t classes = 3;
};

struct DataSpec {
    std::optional<std::filesystem::path> path;
    std::string target_column = "target";
    std::optional<std::size_t> num_classes;
    std::optional<SynthSpec> synth;
};

struct ConformalSpec {
    std::string method;  // baseline | adaptive for classification, scalar for regression
    double alpha = 0.1;
    conformal::ApsMode mode = conformal::ApsMode::deterministic;
};

enum class ConfigKind { train, benchmark };

/// Parsed `train` / `benchmark` document. Relative paths are resolved
/// against the config file's directory.
struct RunConfig {
    Task task = Task::classification;
    std::uint64_t seed = 0;
    std::string preset = "desk";
    DataSpec data;
    std::array<double, 3> split{0.6, 0.2, 0.2};

    std::vector<std::size_t> hidden_widths{32, 32};
    Activation activation = Activation::tanh;
    Head head = Head::classification;
    double noise_variance = 1.0;

    std::string method = "map";
    OptimConfig optimizer;
    double prior_precision = 1.0;
    SwagConfig swag;
    std::optional<std::size_t> swag_epochs;
    std::size_t ensemble_members = 5;
    AdviConfig advi;

    std::optional<std::size_t> n_samples;
    bool calibration = false;
    calibration::TemperatureOptimizer calibration_optimizer = calibration::TemperatureOptimizer::golden_section;
    std::optional<ConformalSpec> conformal;
    std::size_t bins = 15;
    std::optional<std::filesystem::path> out_dir;

    std::vector<std::uint64_t> seeds;  // benchmark only

    /// Seeds of the pipeline stages, all derived from `seed`.
    std::uint64_t data_seed() const { return derive_seed(seed, 0); }
    std::uint64_t split_seed() const { return derive_seed(seed, 1); }
    std::uint64_t init_seed() const { return derive_seed(seed, 2); }
    std::uint64_t optimizer_seed() const { return derive_seed(seed, 3); }
    std::uint64_t predictive_seed() const { return derive_seed(seed, 4); }
    std::uint64_t conformal_seed() const { return derive_seed(seed, 5); }
};

/// Throws ConfigError listing every problem.
RunConfig parse_run_config(const nlohmann::json& doc, ConfigKind kind,
                           const std::filesystem::path& base_dir = {});
/// Unreadable or non-JSON files raise ConfigError as well.
RunConfig load_run_config(const std::filesystem::path& path, ConfigKind kind);

} // namespace uqkit::cli
