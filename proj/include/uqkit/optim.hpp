#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace uqkit {

enum class Algorithm { adam, sgd };

std::string_view to_string(Algorithm a);
Algorithm parse_algorithm(std::string_view name);

struct OptimConfig {
    Algorithm algorithm = Algorithm::adam;
    double learning_rate = 1e-3;
    std::size_t epochs = 300;
    std::size_t batch_size = 32;
    /// Gaussian prior precision divided by n; unset means prior precision 1.
    std::optional<double> weight_decay;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    std::uint64_t seed = 0;

    /// Throws InvalidInput unless learning_rate > 0 (>= 0 with allow_zero_rate), epochs >= 1, batch_size >= 1.
    void validate(bool allow_zero_rate = false) const;
    double weight_decay_for(std::size_t n) const;
};

/// First-order optimizer with per-coordinate state.
class Optimizer {
public:
    Optimizer(const OptimConfig& cfg, std::size_t size);
    void step(std::span<double> theta, std::span<const double> grad);

private:
    OptimConfig cfg_;
    std::vector<double> m_, v_;
    std::size_t t_ = 0;
};

} // namespace uqkit
