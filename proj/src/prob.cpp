#include "uqkit/prob.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "uqkit/error.hpp"
#include "uqkit/kernels.hpp"

namespace uqkit {

std::vector<double> softmax(std::span<const double> logits) {
    if (logits.empty()) {
        throw InvalidInput("softmax of empty vector");
    }
    for (double v : logits) {
        if (!std::isfinite(v)) {
            throw InvalidInput("softmax input must be finite");
        }
    }
    std::vector<double> out(logits.size());
    kernels::softmax_row(logits, 1.0, out);
    return out;
}

double log_sum_exp(std::span<const double> values) {
    if (values.empty()) {
        throw InvalidInput("log_sum_exp of empty vector");
    }
    const double m = *std::max_element(values.begin(), values.end());
    if (std::isinf(m)) {
        return m;
    }
    double sum = 0.0;
    for (double v : values) {
        sum += std::exp(v - m);
    }
    return m + std::log(sum);
}

double kth_smallest(std::span<const double> values, std::size_t k) {
    if (k < 1 || k > values.size()) {
        throw std::out_of_range("kth_smallest: k=" + std::to_string(k) + " outside [1, " +
                                std::to_string(values.size()) + "]");
    }
    std::vector<double> copy(values.begin(), values.end());
    auto nth = copy.begin() + static_cast<std::ptrdiff_t>(k - 1);
    std::nth_element(copy.begin(), nth, copy.end());
    return *nth;
}

double entropy(std::span<const double> probs) {
    double h = 0.0;
    for (double p : probs) {
        if (p > 0.0) {
            h -= p * std::log(p);
        }
    }
    return h;
}

std::size_t argmax(std::span<const double> values) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < values.size(); ++i) {
        if (values[i] > values[best]) {
            best = i;
        }
    }
    return best;
}

Matrix softmax_rows(const Matrix& logits, double temperature) {
    if (!logits.all_finite()) {
        throw InvalidInput("softmax input must be finite");
    }
    return kernels::parallel::softmax_rows(logits, temperature);
}

void require_normalized_rows(const Matrix& probs, double tol, const char* what) {
    for (std::size_t r = 0; r < probs.rows(); ++r) {
        double sum = 0.0;
        for (double p : probs.row(r)) {
            if (!(p >= 0.0) || !std::isfinite(p)) {
                throw InvalidInput(std::string(what) + ": row " + std::to_string(r) +
                                   " has an invalid probability");
            }
            sum += p;
        }
        if (std::abs(sum - 1.0) > tol) {
            throw InvalidInput(std::string(what) + ": row " + std::to_string(r) +
                               " does not sum to 1");
        }
    }
}

} // namespace uqkit
