#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "uqkit/autodiff.hpp"
#include "uqkit/data.hpp"
#include "uqkit/matrix.hpp"

namespace uqkit {

enum class Activation { tanh, relu };

/// Output head and likelihood.
///   classification : output_dim logits, softmax likelihood
///   gaussian       : two outputs (mean, log-variance), heteroscedastic Gaussian
///   squared_error  : one output (mean), Gaussian with fixed noise_variance
enum class Head { classification, gaussian, squared_error };

std::string_view to_string(Activation a);
Activation parse_activation(std::string_view name);
std::string_view to_string(Head h);
Head parse_head(std::string_view name);

/// Fully connected network. Parameters are stored layer by layer: the
/// fan_in x fan_out weight block (row-major) followed by fan_out biases.
/// Weights start U(-sqrt(3/fan_in), sqrt(3/fan_in)) drawn in storage order from
/// Rng(init_seed); biases start at zero.
struct MlpConfig {
    std::size_t input_dim = 1;
    std::vector<std::size_t> hidden_widths;
    std::size_t output_dim = 1;
    Activation activation = Activation::tanh;
    std::uint64_t init_seed = 0;
    Head head = Head::classification;
    double noise_variance = 1.0;  // squared_error only

    void validate() const;
    std::size_t param_count() const;
    Task task() const { return head == Head::classification ? Task::classification : Task::regression; }

    bool operator==(const MlpConfig&) const = default;
};

using ParamVector = std::vector<double>;

ParamVector init_params(const MlpConfig& cfg);

/// Outputs per row: logits, or (mean, log-variance), or mean.
Matrix mlp_forward(const MlpConfig& cfg, std::span<const double> theta, const Matrix& inputs);

/// Same network on the tape; `theta` is a 1 x P node.
ad::Var mlp_forward(ad::Tape& tape, const MlpConfig& cfg, ad::Var theta, const Matrix& inputs);

/// Mean negative log-likelihood of a batch on the tape.
ad::Var mean_nll(ad::Tape& tape, const MlpConfig& cfg, ad::Var outputs, std::span<const int> labels,
                 std::span<const double> targets);

/// Mean negative log-likelihood of plain outputs.
double mean_nll(const MlpConfig& cfg, const Matrix& outputs, std::span<const int> labels,
                std::span<const double> targets);

/// Throws InvalidInput if the dataset does not fit the network's input and head.
void check_compatible(const MlpConfig& cfg, const Dataset& ds);

/// Regression outputs as (mean, variance) columns.
struct GaussianOutputs {
    std::vector<double> mean;
    std::vector<double> variance;
};
GaussianOutputs gaussian_outputs(const MlpConfig& cfg, const Matrix& outputs);

} // namespace uqkit
