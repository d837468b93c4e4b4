#include "uqkit/mlp.hpp"

#include <cmath>
#include <string>

#include "uqkit/error.hpp"
#include "uqkit/kernels.hpp"
#include "uqkit/rng.hpp"

namespace uqkit {

namespace {

constexpr double log_two_pi = 1.8378770664093454836;

struct Layer {
    std::size_t fan_in, fan_out, offset;
};

std::vector<Layer> layers(const MlpConfig& cfg) {
    std::vector<Layer> out;
    std::size_t in = cfg.input_dim, offset = 0;
    auto add = [&](std::size_t width) {
        out.push_back({in, width, offset});
        offset += (in + 1) * width;
        in = width;
    };
    for (std::size_t w : cfg.hidden_widths) add(w);
    add(cfg.output_dim);
    return out;
}

void check_theta(const MlpConfig& cfg, std::size_t size) {
    if (size != cfg.param_count())
        throw InvalidInput("parameter vector has length " + std::to_string(size) + ", network needs " +
                           std::to_string(cfg.param_count()));
}

void check_inputs(const MlpConfig& cfg, const Matrix& inputs) {
    if (inputs.cols() != cfg.input_dim)
        throw InvalidInput("inputs have " + std::to_string(inputs.cols()) + " columns, network expects " +
                           std::to_string(cfg.input_dim));
}

} // namespace

std::string_view to_string(Activation a) { return a == Activation::tanh ? "tanh" : "relu"; }

Activation parse_activation(std::string_view name) {
    if (name == "tanh") return Activation::tanh;
    if (name == "relu") return Activation::relu;
    throw InvalidInput("unknown activation '" + std::string(name) + "' (expected tanh or relu)");
}

std::string_view to_string(Head h) {
    switch (h) {
    case Head::classification: return "classification";
    case Head::gaussian: return "gaussian";
    case Head::squared_error: return "squared_error";
    }
    return "classification";
}

Head parse_head(std::string_view name) {
    if (name == "classification") return Head::classification;
    if (name == "gaussian") return Head::gaussian;
    if (name == "squared_error") return Head::squared_error;
    throw InvalidInput("unknown head '" + std::string(name) + "' (expected classification, gaussian or squared_error)");
}

void MlpConfig::validate() const {
    if (input_dim == 0) throw InvalidInput("input_dim must be at least 1");
    for (std::size_t w : hidden_widths)
        if (w == 0) throw InvalidInput("hidden widths must be at least 1");
    switch (head) {
    case Head::classification:
        if (output_dim < 2) throw InvalidInput("classification needs output_dim >= 2");
        break;
    case Head::gaussian:
        if (output_dim != 2) throw InvalidInput("gaussian head needs output_dim = 2 (mean, log-variance)");
        break;
    case Head::squared_error:
        if (output_dim != 1) throw InvalidInput("squared_error head needs output_dim = 1");
        if (!(noise_variance > 0.0) || !std::isfinite(noise_variance))
            throw InvalidInput("noise_variance must be positive");
        break;
    }
}

std::size_t MlpConfig::param_count() const {
    std::size_t total = 0;
    for (const auto& l : layers(*this)) total += (l.fan_in + 1) * l.fan_out;
    return total;
}

ParamVector init_params(const MlpConfig& cfg) {
    cfg.validate();
    ParamVector theta(cfg.param_count(), 0.0);
    Rng rng(cfg.init_seed);
    for (const auto& l : layers(cfg)) {
        const double limit = std::sqrt(3.0 / static_cast<double>(l.fan_in));
        for (std::size_t i = 0; i < l.fan_in * l.fan_out; ++i) theta[l.offset + i] = limit * (2.0 * rng.uniform() - 1.0);
    }
    return theta;
}

Matrix mlp_forward(const MlpConfig& cfg, std::span<const double> theta, const Matrix& inputs) {
    check_theta(cfg, theta.size());
    check_inputs(cfg, inputs);
    const auto ls = layers(cfg);
    Matrix h = inputs;
    for (std::size_t li = 0; li < ls.size(); ++li) {
        const auto& l = ls[li];
        Matrix w(l.fan_in, l.fan_out,
                 std::vector<double>(theta.begin() + static_cast<long>(l.offset),
                                     theta.begin() + static_cast<long>(l.offset + l.fan_in * l.fan_out)));
        Matrix z = kernels::parallel::gemm(h, w);
        const double* b = theta.data() + l.offset + l.fan_in * l.fan_out;
        const bool hidden = li + 1 < ls.size();
        for (std::size_t r = 0; r < z.rows(); ++r) {
            auto row = z.row(r);
            for (std::size_t c = 0; c < l.fan_out; ++c) {
                double v = row[c] + b[c];
                if (hidden) v = cfg.activation == Activation::tanh ? std::tanh(v) : (v > 0.0 ? v : 0.0);
                row[c] = v;
            }
        }
        h = std::move(z);
    }
    return h;
}

ad::Var mlp_forward(ad::Tape& tape, const MlpConfig& cfg, ad::Var theta, const Matrix& inputs) {
    check_theta(cfg, theta.value().size());
    check_inputs(cfg, inputs);
    const auto ls = layers(cfg);
    ad::Var h = tape.constant(inputs);
    for (std::size_t li = 0; li < ls.size(); ++li) {
        const auto& l = ls[li];
        ad::Var w = ad::slice(theta, l.offset, l.fan_in, l.fan_out);
        ad::Var b = ad::slice(theta, l.offset + l.fan_in * l.fan_out, 1, l.fan_out);
        h = ad::matmul(h, w) + b;
        if (li + 1 < ls.size()) h = cfg.activation == Activation::tanh ? ad::tanh(h) : ad::relu(h);
    }
    return h;
}

void check_compatible(const MlpConfig& cfg, const Dataset& ds) {
    cfg.validate();
    if (ds.dim() != cfg.input_dim)
        throw InvalidInput("dataset has " + std::to_string(ds.dim()) + " features, network expects " +
                           std::to_string(cfg.input_dim));
    if (ds.task != cfg.task())
        throw InvalidInput("dataset task " + std::string(to_string(ds.task)) + " does not match head " +
                           std::string(to_string(cfg.head)));
    if (cfg.head == Head::classification && ds.num_classes > cfg.output_dim)
        throw InvalidInput("dataset has " + std::to_string(ds.num_classes) + " classes, network outputs " +
                           std::to_string(cfg.output_dim));
}

ad::Var mean_nll(ad::Tape& tape, const MlpConfig& cfg, ad::Var outputs, std::span<const int> labels,
                 std::span<const double> targets) {
    const std::size_t n = outputs.rows();
    if (cfg.head == Head::classification) {
        if (labels.size() != n) throw InvalidInput("labels length does not match batch");
        Matrix onehot(n, outputs.cols());
        for (std::size_t i = 0; i < n; ++i) onehot(i, static_cast<std::size_t>(labels[i])) = 1.0;
        ad::Var m = ad::max_rows(outputs);
        ad::Var lse = ad::log(ad::sum_rows(ad::exp(outputs - m))) + m;
        ad::Var zy = ad::sum_rows(outputs * tape.constant(onehot));
        return ad::mean(lse - zy);
    }
    if (targets.size() != n) throw InvalidInput("targets length does not match batch");
    ad::Var y = tape.constant(Matrix::column_vector(targets));
    if (cfg.head == Head::squared_error) {
        ad::Var r = y - outputs;
        return ad::mean(r * r) * (0.5 / cfg.noise_variance) + 0.5 * (log_two_pi + std::log(cfg.noise_variance));
    }
    ad::Var mu = ad::matmul(outputs, tape.constant(Matrix{{1.0}, {0.0}}));
    ad::Var logv = ad::matmul(outputs, tape.constant(Matrix{{0.0}, {1.0}}));
    ad::Var r = y - mu;
    return ad::mean(logv + r * r * ad::exp(-logv)) * 0.5 + 0.5 * log_two_pi;
}

double mean_nll(const MlpConfig& cfg, const Matrix& outputs, std::span<const int> labels,
                std::span<const double> targets) {
    const std::size_t n = outputs.rows();
    double acc = 0.0;
    if (cfg.head == Head::classification) {
        if (labels.size() != n) throw InvalidInput("labels length does not match batch");
        for (std::size_t i = 0; i < n; ++i) {
            const auto z = outputs.row(i);
            double m = z[0];
            for (double v : z) m = std::max(m, v);
            double s = 0.0;
            for (double v : z) s += std::exp(v - m);
            acc += std::log(s) + m - z[static_cast<std::size_t>(labels[i])];
        }
        return acc / static_cast<double>(n);
    }
    if (targets.size() != n) throw InvalidInput("targets length does not match batch");
    for (std::size_t i = 0; i < n; ++i) {
        if (cfg.head == Head::squared_error) {
            const double r = targets[i] - outputs(i, 0);
            acc += 0.5 * r * r / cfg.noise_variance + 0.5 * (log_two_pi + std::log(cfg.noise_variance));
        } else {
            const double r = targets[i] - outputs(i, 0), logv = outputs(i, 1);
            acc += 0.5 * (log_two_pi + logv + r * r * std::exp(-logv));
        }
    }
    return acc / static_cast<double>(n);
}

GaussianOutputs gaussian_outputs(const MlpConfig& cfg, const Matrix& outputs) {
    if (cfg.head == Head::classification) throw InvalidInput("classification head has no Gaussian outputs");
    GaussianOutputs g;
    for (std::size_t i = 0; i < outputs.rows(); ++i) {
        g.mean.push_back(outputs(i, 0));
        g.variance.push_back(cfg.head == Head::gaussian ? std::exp(outputs(i, 1)) : cfg.noise_variance);
    }
    return g;
}

} // namespace uqkit
