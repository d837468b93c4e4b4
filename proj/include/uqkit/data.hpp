#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "uqkit/matrix.hpp"

namespace uqkit {

enum class Task { classification, regression };

std::string_view to_string(Task task);
Task parse_task(std::string_view name);

/// Inputs plus labels (classification) or real targets (regression).
struct Dataset {
    Task task = Task::classification;
    Matrix inputs;
    std::vector<int> labels;
    std::vector<double> targets;
    std::size_t num_classes = 0;
    std::vector<std::string> feature_names;

    std::size_t size() const noexcept { return inputs.rows(); }
    std::size_t dim() const noexcept { return inputs.cols(); }
    Dataset subset(std::span<const std::size_t> rows) const;
    /// Throws InvalidInput if the invariants (n >= 1, labels in range, finite) fail.
    void validate() const;
};

/// Loads a CSV whose non-target columns are features, in header order.
/// K is max label + 1 unless `num_classes` is given.
Dataset load_csv(const std::filesystem::path& path, Task task, std::string_view target_column,
                 std::optional<std::size_t> num_classes = std::nullopt);
void write_csv(const std::filesystem::path& path, const Dataset& ds, std::string_view target_column = "target");

struct Splits {
    Dataset train;
    Dataset calib;
    Dataset test;
};

/// Seeded permutation cut into floor-sized calib/test parts; the remainder goes to train.
Splits split(const Dataset& ds, std::array<double, 3> fractions, std::uint64_t seed);

struct BatchPlan {
    std::size_t batch_size = 32;
    std::uint64_t shuffle_seed = 0;
    bool drop_last = false;
};

struct Batch {
    Matrix inputs;
    std::vector<int> labels;
    std::vector<double> targets;
    std::vector<std::size_t> rows;
};

/// Mini-batches of one epoch, permuted by the (shuffle_seed, epoch) child stream.
std::vector<Batch> batches(const Dataset& ds, const BatchPlan& plan, std::size_t epoch);
std::size_t batches_per_epoch(std::size_t n, const BatchPlan& plan);

/// "two_moons" or "gaussian_blobs". `classes` only applies to blobs.
Dataset synth_classification(std::string_view name, std::size_t n, double noise, std::uint64_t seed,
                             std::size_t classes = 3);

/// y = sin(3x + 1) + noise, x ~ U(-1, 1); used by the regression demos.
Dataset synth_regression(std::size_t n, double noise, std::uint64_t seed);

} // namespace uqkit
