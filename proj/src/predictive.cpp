#include "uqkit/predictive.hpp"

#include <cmath>

#include "uqkit/error.hpp"
#include "uqkit/prob.hpp"

namespace uqkit {

namespace {

// Network outputs for each posterior draw. A MAP state yields its single output.
std::vector<Matrix> sampled_outputs(const PosteriorState& state, const MlpConfig& cfg, const Matrix& inputs,
                                    const PredictiveConfig& pcfg) {
    cfg.validate();
    if (param_count(state) != cfg.param_count()) throw InvalidInput("posterior state does not match the network");
    const std::size_t s = std::holds_alternative<MapState>(state) ? 1 : resolve_samples(state, pcfg);
    Rng rng(derive_seed(pcfg.seed, 0));
    const auto thetas = posterior_sample(state, rng, s);
    std::vector<Matrix> outs(s);
    for_each_index(s, pcfg.execution, [&](std::size_t k) { outs[k] = mlp_forward(cfg, thetas[k], inputs); });
    return outs;
}

void require_head(const MlpConfig& cfg, bool classification) {
    if ((cfg.head == Head::classification) != classification)
        throw InvalidInput(classification ? "classification statistics need a classification head"
                                          : "regression statistics need a regression head");
}

} // namespace

std::size_t default_samples(const PosteriorState& state) {
    if (std::holds_alternative<MapState>(state)) return 1;
    if (const auto* e = std::get_if<EnsembleState>(&state)) return e->members.size();
    return 30;
}

std::size_t resolve_samples(const PosteriorState& state, const PredictiveConfig& pcfg) {
    const std::size_t s = pcfg.n_samples.value_or(default_samples(state));
    if (s < 1) throw InvalidInput("n_samples must be at least 1");
    return s;
}

Matrix predictive_mean_classification(const PosteriorState& state, const MlpConfig& cfg, const Matrix& inputs,
                                      const PredictiveConfig& pcfg) {
    require_head(cfg, true);
    const auto outs = sampled_outputs(state, cfg, inputs, pcfg);
    Matrix mean(inputs.rows(), cfg.output_dim, 0.0);
    for (const Matrix& logits : outs) {
        const Matrix p = softmax_rows(logits);
        for (std::size_t i = 0; i < p.size(); ++i) mean.flat()[i] += p.flat()[i];
    }
    const double inv = 1.0 / static_cast<double>(outs.size());
    if (outs.size() > 1)
        for (double& v : mean.flat()) v *= inv;
    return mean;
}

std::vector<double> predictive_entropy(const PosteriorState& state, const MlpConfig& cfg, const Matrix& inputs,
                                       const PredictiveConfig& pcfg) {
    const Matrix p = predictive_mean_classification(state, cfg, inputs, pcfg);
    std::vector<double> h(p.rows());
    for (std::size_t i = 0; i < p.rows(); ++i) h[i] = entropy(p.row(i));
    return h;
}

RegressionMoments predictive_moments_regression(const PosteriorState& state, const MlpConfig& cfg,
                                                const Matrix& inputs, const PredictiveConfig& pcfg) {
    require_head(cfg, false);
    const auto outs = sampled_outputs(state, cfg, inputs, pcfg);
    const std::size_t n = inputs.rows();
    const double s = static_cast<double>(outs.size());
    std::vector<GaussianOutputs> g;
    for (const Matrix& o : outs) g.push_back(gaussian_outputs(cfg, o));
    RegressionMoments m{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0), std::vector<double>(n, 0.0),
                        std::vector<double>(n)};
    for (std::size_t i = 0; i < n; ++i) {
        for (const auto& d : g) {
            m.mean[i] += d.mean[i];
            m.aleatoric[i] += d.variance[i];
        }
        m.mean[i] /= s;
        m.aleatoric[i] /= s;
        for (const auto& d : g) m.epistemic[i] += (d.mean[i] - m.mean[i]) * (d.mean[i] - m.mean[i]);
        m.epistemic[i] /= s;
        m.total[i] = m.aleatoric[i] + m.epistemic[i];
    }
    return m;
}

CredibleIntervals credible_interval_regression(const PosteriorState& state, const MlpConfig& cfg,
                                               const Matrix& inputs, conformal::ErrorLevel alpha,
                                               const PredictiveConfig& pcfg) {
    require_head(cfg, false);
    const auto outs = sampled_outputs(state, cfg, inputs, pcfg);
    const std::size_t n = inputs.rows(), s = resolve_samples(state, pcfg);
    std::vector<GaussianOutputs> g;
    for (const Matrix& o : outs) g.push_back(gaussian_outputs(cfg, o));

    const double a = alpha.alpha();
    const double ds = static_cast<double>(s);
    const auto rank = [&](double q) {
        const auto k = static_cast<std::size_t>(std::ceil(q * ds - 1e-9));
        return std::clamp<std::size_t>(k, 1, s);
    };
    const std::size_t lo_k = rank(a / 2.0), hi_k = rank(1.0 - a / 2.0);
    const std::uint64_t noise_seed = derive_seed(pcfg.seed, 1);

    CredibleIntervals out;
    out.intervals.resize(n);
    for_each_index(n, pcfg.execution, [&](std::size_t i) {
        Rng rng = Rng::child(noise_seed, i);
        std::vector<double> ys(s);
        for (std::size_t k = 0; k < s; ++k) {
            const auto& d = g[k % g.size()];
            ys[k] = d.mean[i] + std::sqrt(d.variance[i]) * rng.standard_normal();
        }
        out.intervals[i] = Interval{kth_smallest(ys, lo_k), kth_smallest(ys, hi_k)};
    });
    if (ds < 2.0 / a)
        out.warning = std::to_string(s) + " posterior draws are fewer than 2/alpha; interval ends are unreliable";
    return out;
}

} // namespace uqkit
