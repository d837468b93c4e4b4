#include "uqkit/optim.hpp"

#include <cmath>
#include <string>

#include "uqkit/error.hpp"

namespace uqkit {

std::string_view to_string(Algorithm a) { return a == Algorithm::adam ? "adam" : "sgd"; }

Algorithm parse_algorithm(std::string_view name) {
    if (name == "adam") return Algorithm::adam;
    if (name == "sgd") return Algorithm::sgd;
    throw InvalidInput("unknown optimizer '" + std::string(name) + "' (expected adam or sgd)");
}

void OptimConfig::validate(bool allow_zero_rate) const {
    if (!std::isfinite(learning_rate) || learning_rate < 0.0 || (!allow_zero_rate && learning_rate == 0.0))
        throw InvalidInput("learning_rate must be positive");
    if (epochs < 1) throw InvalidInput("epochs must be at least 1");
    if (batch_size < 1) throw InvalidInput("batch_size must be at least 1");
    if (weight_decay && (!std::isfinite(*weight_decay) || *weight_decay < 0.0))
        throw InvalidInput("weight_decay must be non-negative");
    if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0) || !(eps > 0.0))
        throw InvalidInput("adam betas must lie in [0, 1) and eps must be positive");
}

double OptimConfig::weight_decay_for(std::size_t n) const {
    return weight_decay ? *weight_decay : 1.0 / static_cast<double>(n);
}

Optimizer::Optimizer(const OptimConfig& cfg, std::size_t size) : cfg_(cfg) {
    if (cfg_.algorithm == Algorithm::adam) {
        m_.assign(size, 0.0);
        v_.assign(size, 0.0);
    }
}

void Optimizer::step(std::span<double> theta, std::span<const double> grad) {
    ++t_;
    const double lr = cfg_.learning_rate;
    if (cfg_.algorithm == Algorithm::sgd) {
        for (std::size_t j = 0; j < theta.size(); ++j) theta[j] -= lr * grad[j];
        return;
    }
    const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    for (std::size_t j = 0; j < theta.size(); ++j) {
        m_[j] = cfg_.beta1 * m_[j] + (1.0 - cfg_.beta1) * grad[j];
        v_[j] = cfg_.beta2 * v_[j] + (1.0 - cfg_.beta2) * grad[j] * grad[j];
        theta[j] -= lr * (m_[j] / c1) / (std::sqrt(v_[j] / c2) + cfg_.eps);
    }
}

} // namespace uqkit
