#include "uqkit/posterior.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include "uqkit/error.hpp"
#include "uqkit/prob.hpp"

namespace uqkit {

namespace {

bool finite(std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

double squared_norm(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return s;
}

// Mean batch NLL and its gradient at theta.
double batch_nll_grad(const MlpConfig& cfg, const Batch& batch, std::span<const double> theta,
                      std::vector<double>& grad) {
    ad::Tape tape;
    ad::Var th = tape.variable(Matrix::row_vector(theta));
    ad::Var out = mlp_forward(tape, cfg, th, batch.inputs);
    ad::Var loss = mean_nll(tape, cfg, out, batch.labels, batch.targets);
    tape.backward(loss);
    const auto& g = tape.grad(th).data();
    grad.assign(g.begin(), g.end());
    return loss.scalar();
}

using StepHook = std::function<void(std::span<const double>)>;

// Shared optimization loop of MAP and SWAG. On divergence theta is restored to
// the last finite iterate.
TrainStatus run_epochs(const MlpConfig& cfg, const Dataset& train, const OptimConfig& opt, double weight_decay,
                       std::uint64_t shuffle_seed, ParamVector& theta, std::vector<double>& trace,
                       const StepHook& after_step) {
    Optimizer optimizer(opt, theta.size());
    const BatchPlan plan{opt.batch_size, shuffle_seed, false};
    ParamVector last_good = theta;
    std::vector<double> grad;
    std::size_t step = 0;
    for (std::size_t epoch = 0; epoch < opt.epochs; ++epoch) {
        for (const Batch& batch : batches(train, plan, epoch)) {
            ++step;
            const double loss = batch_nll_grad(cfg, batch, theta, grad);
            if (!std::isfinite(loss) || !finite(grad)) {
                theta = last_good;
                return {true, "non-finite loss at epoch " + std::to_string(epoch + 1) + ", step " + std::to_string(step)};
            }
            for (std::size_t j = 0; j < theta.size(); ++j) grad[j] += weight_decay * theta[j];
            optimizer.step(theta, grad);
            if (!finite(theta)) {
                theta = last_good;
                return {true, "non-finite parameters at epoch " + std::to_string(epoch + 1) + ", step " +
                                  std::to_string(step)};
            }
            last_good = theta;
            if (after_step) after_step(theta);
        }
        const double objective = map_objective(cfg, train, theta, weight_decay);
        if (!std::isfinite(objective))
            return {true, "non-finite objective after epoch " + std::to_string(epoch + 1)};
        trace.push_back(objective);
    }
    return {};
}

void check_training_inputs(const MlpConfig& cfg, const Dataset& train) {
    cfg.validate();
    train.validate();
    check_compatible(cfg, train);
}

} // namespace

std::vector<double> SwagState::diag_variance() const {
    std::vector<double> v(mean.size());
    for (std::size_t j = 0; j < v.size(); ++j)
        v[j] = std::max(diag_second_moment[j] - mean[j] * mean[j], swag_variance_floor);
    return v;
}

std::string_view method_name(const PosteriorState& state) {
    static constexpr std::string_view names[] = {"map", "ensemble", "swag", "laplace", "advi"};
    return names[state.index()];
}

std::size_t param_count(const PosteriorState& state) {
    return std::visit(
        [](const auto& s) -> std::size_t {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, MapState>) return s.theta.size();
            else if constexpr (std::is_same_v<T, EnsembleState>) return s.members.empty() ? 0 : s.members[0].size();
            else if constexpr (std::is_same_v<T, LaplaceState>) return s.mode.size();
            else return s.mean.size();
        },
        state);
}

double map_objective(const MlpConfig& cfg, const Dataset& data, std::span<const double> theta, double weight_decay) {
    const Matrix out = mlp_forward(cfg, theta, data.inputs);
    return mean_nll(cfg, out, data.labels, data.targets) + 0.5 * weight_decay * squared_norm(theta);
}

MapResult map_fit(const MlpConfig& cfg, const Dataset& train, const OptimConfig& opt) {
    cfg.validate();
    return map_fit(cfg, train, opt, init_params(cfg));
}

MapResult map_fit(const MlpConfig& cfg, const Dataset& train, const OptimConfig& opt, ParamVector start) {
    check_training_inputs(cfg, train);
    opt.validate();
    if (start.size() != cfg.param_count()) throw InvalidInput("starting parameters do not match the network");
    if (!finite(start)) throw InvalidInput("starting parameters must be finite");
    const double wd = opt.weight_decay_for(train.size());
    MapResult r;
    r.state.theta = std::move(start);
    r.initial_loss = map_objective(cfg, train, r.state.theta, wd);
    r.status = run_epochs(cfg, train, opt, wd, opt.seed, r.state.theta, r.trace, {});
    return r;
}

EnsembleResult ensemble_fit(const MlpConfig& cfg, const Dataset& train, const OptimConfig& opt, std::size_t members,
                            Execution exec) {
    if (members < 2) throw InvalidInput("an ensemble needs at least 2 members");
    check_training_inputs(cfg, train);
    opt.validate();
    std::vector<MapResult> fits(members);
    for_each_index(members, exec, [&](std::size_t m) {
        MlpConfig member_cfg = cfg;
        member_cfg.init_seed = derive_seed(cfg.init_seed, m);
        OptimConfig member_opt = opt;
        member_opt.seed = derive_seed(opt.seed, m);
        fits[m] = map_fit(member_cfg, train, member_opt);
    });
    EnsembleResult r;
    for (std::size_t m = 0; m < members; ++m) {
        r.state.members.push_back(std::move(fits[m].state.theta));
        r.traces.push_back(std::move(fits[m].trace));
        if (fits[m].status.diverged && !r.diverged_member) {
            r.diverged_member = m;
            r.status = {true, "ensemble member " + std::to_string(m) + " diverged: " + fits[m].status.message};
        }
    }
    return r;
}

SwagAccumulator::SwagAccumulator(std::size_t size, std::size_t rank)
    : rank_(rank), mean_(size, 0.0), sq_mean_(size, 0.0) {
    if (rank == 0) throw InvalidInput("SWAG rank must be at least 1");
}

void SwagAccumulator::add(std::span<const double> theta) {
    if (theta.size() != mean_.size()) throw InvalidInput("snapshot length does not match accumulator");
    ++count_;
    const double w = 1.0 / static_cast<double>(count_);
    std::vector<double> dev(theta.size());
    for (std::size_t j = 0; j < theta.size(); ++j) {
        mean_[j] += (theta[j] - mean_[j]) * w;
        sq_mean_[j] += (theta[j] * theta[j] - sq_mean_[j]) * w;
        dev[j] = theta[j] - mean_[j];
    }
    deviations_.push_back(std::move(dev));
    if (deviations_.size() > rank_) deviations_.pop_front();
}

SwagState SwagAccumulator::state() const {
    if (count_ < rank_)
        throw InvalidInput("SWAG has " + std::to_string(count_) + " snapshots, rank " + std::to_string(rank_) +
                           " needs at least that many");
    SwagState s;
    s.mean = mean_;
    s.diag_second_moment = sq_mean_;
    s.rank = rank_;
    s.snapshots = count_;
    s.deviations = Matrix(mean_.size(), rank_);
    for (std::size_t k = 0; k < rank_; ++k)
        for (std::size_t j = 0; j < mean_.size(); ++j) s.deviations(j, k) = deviations_[k][j];
    return s;
}

SwagResult swag_fit(const MapState& start, const MlpConfig& cfg, const Dataset& train, const OptimConfig& opt,
                    const SwagConfig& swag) {
    check_training_inputs(cfg, train);
    opt.validate(true);
    if (swag.rank == 0) throw InvalidInput("SWAG rank must be at least 1");
    if (start.theta.size() != cfg.param_count()) throw InvalidInput("MAP state does not match the network");
    const BatchPlan plan{opt.batch_size, 0, false};
    const std::size_t per_epoch = batches_per_epoch(train.size(), plan);
    const std::size_t every = swag.snapshot_every == 0 ? per_epoch : swag.snapshot_every;
    const std::size_t total = opt.epochs * per_epoch;
    if (total / every < swag.rank)
        throw InvalidInput("SWAG rank " + std::to_string(swag.rank) + " with a snapshot every " + std::to_string(every) +
                           " steps needs at least " + std::to_string(swag.rank * every) + " steps; the run has " +
                           std::to_string(total));

    OptimConfig phase = opt;
    if (swag.algorithm) phase.algorithm = *swag.algorithm;
    SwagAccumulator acc(start.theta.size(), swag.rank);
    std::size_t step = 0;
    SwagResult r;
    ParamVector theta = start.theta;
    r.status = run_epochs(cfg, train, phase, opt.weight_decay_for(train.size()), derive_seed(opt.seed, 1), theta,
                          r.trace, [&](std::span<const double> t) {
                              if (++step % every == 0) acc.add(t);
                          });
    if (r.status.diverged && acc.count() < swag.rank) {
        r.status.message += " (only " + std::to_string(acc.count()) + " snapshots collected)";
        r.state.mean = theta;
        return r;
    }
    r.state = acc.state();
    return r;
}

ParamVector swag_sample(const SwagState& state, Rng& rng) {
    const std::size_t p = state.mean.size();
    const std::vector<double> var = state.diag_variance();
    const double diag_scale = state.rank > 1 ? 1.0 / std::sqrt(2.0) : 1.0;
    ParamVector theta = state.mean;
    for (std::size_t j = 0; j < p; ++j) {
        const double z = rng.standard_normal();
        if (var[j] > swag_variance_floor) theta[j] += diag_scale * std::sqrt(var[j]) * z;
    }
    if (state.rank > 1) {
        const double low_scale = 1.0 / std::sqrt(2.0 * static_cast<double>(state.rank - 1));
        std::vector<double> z(state.rank);
        for (double& v : z) v = rng.standard_normal();
        for (std::size_t j = 0; j < p; ++j) {
            double d = 0.0;
            for (std::size_t k = 0; k < state.rank; ++k) d += state.deviations(j, k) * z[k];
            theta[j] += low_scale * d;
        }
    }
    return theta;
}

std::vector<double> ggn_diagonal(const MlpConfig& cfg, const Dataset& data, std::span<const double> theta,
                                 Execution exec) {
    cfg.validate();
    data.validate();
    check_compatible(cfg, data);
    const std::size_t n = data.size(), p = theta.size(), outputs = cfg.output_dim;
    Matrix per_example(n, p);
    for_each_index(n, exec, [&](std::size_t i) {
        ad::Tape tape;
        ad::Var th = tape.variable(Matrix::row_vector(theta));
        ad::Var out = mlp_forward(tape, cfg, th, data.inputs.select_rows(std::vector<std::size_t>{i}));
        Matrix jac(outputs, p);
        for (std::size_t o = 0; o < outputs; ++o) {
            Matrix seed(1, outputs);
            seed(0, o) = 1.0;
            tape.backward(out, seed);
            const auto g = tape.grad(th).flat();
            std::copy(g.begin(), g.end(), jac.row(o).begin());
        }
        auto row = per_example.row(i);
        const auto f = out.value().flat();
        if (cfg.head == Head::classification) {
            // diag(J^T (diag(p) - p p^T) J) written as a p-weighted variance, which stays >= 0 in rounding
            const auto prob = softmax(f);
            for (std::size_t j = 0; j < p; ++j) {
                double centre = 0.0;
                for (std::size_t o = 0; o < outputs; ++o) centre += prob[o] * jac(o, j);
                double acc = 0.0;
                for (std::size_t o = 0; o < outputs; ++o) acc += prob[o] * (jac(o, j) - centre) * (jac(o, j) - centre);
                row[j] = acc;
            }
        } else if (cfg.head == Head::gaussian) {
            // Fisher of N(mu, e^s) in (mu, s) is diag(e^-s, 1/2)
            const double inv_var = std::exp(-f[1]);
            for (std::size_t j = 0; j < p; ++j) row[j] = inv_var * jac(0, j) * jac(0, j) + 0.5 * jac(1, j) * jac(1, j);
        } else {
            for (std::size_t j = 0; j < p; ++j) row[j] = jac(0, j) * jac(0, j) / cfg.noise_variance;
        }
    });
    std::vector<double> total(p, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < p; ++j) total[j] += per_example(i, j);
    return total;
}

LaplaceResult laplace_fit(const MapState& start, const MlpConfig& cfg, const Dataset& train, double prior_precision,
                          Execution exec) {
    if (!(prior_precision > 0.0) || !std::isfinite(prior_precision))
        throw InvalidInput("prior precision must be positive");
    if (start.theta.size() != cfg.param_count()) throw InvalidInput("MAP state does not match the network");
    LaplaceResult r;
    r.state.mode = start.theta;
    r.state.diag_precision = ggn_diagonal(cfg, train, start.theta, exec);
    std::size_t clamped = 0;
    for (double& v : r.state.diag_precision) {
        v += prior_precision;
        if (!(v > 0.0) || !std::isfinite(v)) {
            v = prior_precision;
            ++clamped;
        }
    }
    if (clamped > 0)
        r.warning = std::to_string(clamped) + " precision entries were not positive and were reset to the prior precision";
    return r;
}

double advi_kl(std::span<const double> mean, std::span<const double> log_std, double prior_precision) {
    double kl = 0.0;
    for (std::size_t j = 0; j < mean.size(); ++j) {
        const double var = std::exp(2.0 * log_std[j]);
        kl += 0.5 * (prior_precision * (var + mean[j] * mean[j]) - 1.0 - std::log(prior_precision) - 2.0 * log_std[j]);
    }
    return kl;
}

ad::ValueAndGrad advi_objective(const MlpConfig& cfg, const Matrix& inputs, std::span<const int> labels,
                                std::span<const double> targets, std::size_t n_total, double prior_precision,
                                std::span<const double> mean, std::span<const double> log_std, const Matrix& noise) {
    const std::size_t p = mean.size();
    if (log_std.size() != p || noise.cols() != p || noise.rows() == 0)
        throw InvalidInput("ADVI parameters and noise must share the parameter length");
    std::vector<double> packed(mean.begin(), mean.end());
    packed.insert(packed.end(), log_std.begin(), log_std.end());
    const double lambda = prior_precision;
    const double per_datum = 1.0 / static_cast<double>(n_total);
    return ad::value_and_grad(
        [&](ad::Tape& tape, ad::Var x) {
            ad::Var mu = ad::slice(x, 0, 1, p);
            ad::Var rho = ad::slice(x, p, 1, p);
            ad::Var scale = ad::exp(rho);
            ad::Var nll = tape.constant(0.0);
            for (std::size_t s = 0; s < noise.rows(); ++s) {
                ad::Var theta = mu + scale * tape.constant(Matrix::row_vector(noise.row(s)));
                nll = nll + mean_nll(tape, cfg, mlp_forward(tape, cfg, theta, inputs), labels, targets);
            }
            ad::Var kl = (ad::sum(lambda * ad::exp(rho * 2.0) + lambda * (mu * mu) - 2.0 * rho) +
                          static_cast<double>(p) * (-1.0 - std::log(lambda))) *
                         0.5;
            return nll * (1.0 / static_cast<double>(noise.rows())) + kl * per_datum;
        },
        packed);
}

double advi_elbo(const MlpConfig& cfg, const Dataset& data, const AdviState& state, double prior_precision,
                 std::size_t draws, Rng& rng) {
    double nll = 0.0;
    ParamVector theta(state.mean.size());
    for (std::size_t d = 0; d < draws; ++d) {
        for (std::size_t j = 0; j < theta.size(); ++j)
            theta[j] = state.mean[j] + std::exp(std::max(state.log_std[j], advi_log_std_floor)) * rng.standard_normal();
        nll += mean_nll(cfg, mlp_forward(cfg, theta, data.inputs), data.labels, data.targets);
    }
    return -(nll / static_cast<double>(draws) +
             advi_kl(state.mean, state.log_std, prior_precision) / static_cast<double>(data.size()));
}

AdviResult advi_fit(const MlpConfig& cfg, const Dataset& train, const OptimConfig& opt, const AdviConfig& advi) {
    check_training_inputs(cfg, train);
    opt.validate();
    if (advi.mc_samples < 1) throw InvalidInput("ADVI needs at least one Monte Carlo sample");
    if (!(advi.prior_precision > 0.0) || !std::isfinite(advi.prior_precision))
        throw InvalidInput("prior precision must be positive");
    const std::size_t p = cfg.param_count();
    constexpr std::size_t eval_draws = 16;

    AdviResult r;
    r.state.mean = init_params(cfg);
    r.state.log_std.assign(p, advi.init_log_std);
    {
        Rng eval(derive_seed(opt.seed, 3));
        r.initial_elbo = advi_elbo(cfg, train, r.state, advi.prior_precision, eval_draws, eval);
    }

    Optimizer optimizer(opt, 2 * p);
    std::vector<double> packed(r.state.mean);
    packed.insert(packed.end(), r.state.log_std.begin(), r.state.log_std.end());
    std::vector<double> last_good = packed;
    Rng noise_rng(derive_seed(opt.seed, 2));
    const BatchPlan plan{opt.batch_size, opt.seed, false};
    Matrix noise(advi.mc_samples, p);
    auto unpack = [&](const std::vector<double>& v) {
        r.state.mean.assign(v.begin(), v.begin() + static_cast<long>(p));
        r.state.log_std.assign(v.begin() + static_cast<long>(p), v.end());
    };

    for (std::size_t epoch = 0; epoch < opt.epochs && !r.status.diverged; ++epoch) {
        double epoch_loss = 0.0;
        std::size_t steps = 0;
        for (const Batch& batch : batches(train, plan, epoch)) {
            for (double& z : noise.flat()) z = noise_rng.standard_normal();
            const std::span<const double> mu(packed.data(), p), rho(packed.data() + p, p);
            auto vg = advi_objective(cfg, batch.inputs, batch.labels, batch.targets, train.size(),
                                     advi.prior_precision, mu, rho, noise);
            if (!std::isfinite(vg.value) || !finite(vg.grad)) {
                r.status = {true, "non-finite ELBO at epoch " + std::to_string(epoch + 1)};
                break;
            }
            optimizer.step(packed, vg.grad);
            for (std::size_t j = p; j < 2 * p; ++j) packed[j] = std::max(packed[j], advi_log_std_floor);
            if (!finite(packed)) {
                r.status = {true, "non-finite variational parameters at epoch " + std::to_string(epoch + 1)};
                break;
            }
            last_good = packed;
            epoch_loss += vg.value;
            ++steps;
        }
        if (!r.status.diverged) r.trace.push_back(-epoch_loss / static_cast<double>(steps));
    }
    unpack(last_good);
    Rng eval(derive_seed(opt.seed, 3));
    r.final_elbo = advi_elbo(cfg, train, r.state, advi.prior_precision, eval_draws, eval);
    return r;
}

std::vector<ParamVector> posterior_sample(const PosteriorState& state, Rng& rng, std::size_t n) {
    if (n < 1) throw InvalidInput("n_samples must be at least 1");
    std::vector<ParamVector> out;
    out.reserve(n);
    for (std::size_t s = 0; s < n; ++s) {
        std::visit(
            [&](const auto& st) {
                using T = std::decay_t<decltype(st)>;
                if constexpr (std::is_same_v<T, MapState>) {
                    out.push_back(st.theta);
                } else if constexpr (std::is_same_v<T, EnsembleState>) {
                    out.push_back(st.members[s % st.members.size()]);
                } else if constexpr (std::is_same_v<T, SwagState>) {
                    out.push_back(swag_sample(st, rng));
                } else if constexpr (std::is_same_v<T, LaplaceState>) {
                    ParamVector theta = st.mode;
                    for (std::size_t j = 0; j < theta.size(); ++j)
                        theta[j] += rng.standard_normal() / std::sqrt(st.diag_precision[j]);
                    out.push_back(std::move(theta));
                } else {
                    ParamVector theta = st.mean;
                    for (std::size_t j = 0; j < theta.size(); ++j)
                        theta[j] += std::exp(std::max(st.log_std[j], advi_log_std_floor)) * rng.standard_normal();
                    out.push_back(std::move(theta));
                }
            },
            state);
    }
    return out;
}

} // namespace uqkit
