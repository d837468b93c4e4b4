#pragma once

// Exchangeable synthetic problems for Monte Carlo coverage checks.

#include <cmath>
#include <vector>

#include "uqkit/matrix.hpp"
#include "uqkit/prob.hpp"
#include "uqkit/rng.hpp"

namespace synth {

/// Rows are softmax(scale * z); labels are drawn from the row itself, so the
/// model is calibrated and every (probs, label) pair is i.i.d.
struct ClassSample {
    uqkit::Matrix probs;
    std::vector<int> labels;
};

inline ClassSample classification(uqkit::Rng& rng, std::size_t n, std::size_t k, double scale = 1.5) {
    ClassSample s{uqkit::Matrix(n, k), {}};
    std::vector<double> z(k);
    for (std::size_t i = 0; i < n; ++i) {
        for (double& v : z) v = scale * rng.standard_normal();
        const auto p = uqkit::softmax(z);
        std::copy(p.begin(), p.end(), s.probs.row(i).begin());
        double u = rng.uniform(), acc = 0.0;
        std::size_t label = k - 1;
        for (std::size_t c = 0; c < k; ++c) {
            acc += p[c];
            if (u < acc) { label = c; break; }
        }
        s.labels.push_back(static_cast<int>(label));
    }
    return s;
}

/// Heteroscedastic regression: y = x + sigma(x) eps with sigma(x) = 0.5 + |x|.
/// The supplied means/stds/bounds are deliberately miscalibrated (stds too small).
struct RegSample {
    std::vector<double> x, y, mean, std, lower, upper;
};

inline RegSample regression(uqkit::Rng& rng, std::size_t n) {
    RegSample s;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = 2.0 * rng.uniform() - 1.0;
        const double sigma = 0.5 + std::abs(x);
        s.x.push_back(x);
        s.y.push_back(x + sigma * rng.standard_normal());
        s.mean.push_back(x);
        s.std.push_back(0.6 * sigma);
        s.lower.push_back(x - 0.8 * sigma);
        s.upper.push_back(x + 0.8 * sigma);
    }
    return s;
}

} // namespace synth
