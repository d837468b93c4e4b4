#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "oracles.hpp"
#include "synthetic.hpp"
#include "uqkit/conformal.hpp"
#include "uqkit/error.hpp"
#include "uqkit/metrics.hpp"

using namespace uqkit;
using namespace uqkit::conformal;

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

Dataset regression_data(const std::vector<double>& x, const std::vector<double>& y) {
    Dataset ds;
    ds.task = Task::regression;
    ds.inputs = Matrix::column_vector(x);
    ds.targets = y;
    return ds;
}

// Leave-one-out by hand: refits on explicit copies, then sorts the endpoint lists.
Interval naive_jackknife_plus(const Trainer& trainer, const Dataset& train, const Matrix& x_test, std::size_t j,
                              double alpha) {
    const std::size_t n = train.size();
    std::vector<double> lows, highs;
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> xs, ys;
        for (std::size_t r = 0; r < n; ++r) {
            if (r == i) continue;
            xs.push_back(train.inputs(r, 0));
            ys.push_back(train.targets[r]);
        }
        auto predict = trainer(Matrix::column_vector(xs), ys, 0);
        const double at_i = predict(train.inputs.select_rows(std::vector<std::size_t>{i}))[0];
        const double at_x = predict(x_test.select_rows(std::vector<std::size_t>{j}))[0];
        const double r = std::abs(train.targets[i] - at_i);
        lows.push_back(at_x - r);
        highs.push_back(at_x + r);
    }
    std::sort(lows.begin(), lows.end());
    std::sort(highs.begin(), highs.end());
    const auto lo_k = static_cast<long>(std::floor(alpha * static_cast<double>(n + 1) + 1e-9));
    const auto hi_k = static_cast<long>(std::ceil((1 - alpha) * static_cast<double>(n + 1) - 1e-9));
    return {lo_k >= 1 ? lows[static_cast<std::size_t>(lo_k - 1)] : -inf,
            hi_k <= static_cast<long>(n) ? highs[static_cast<std::size_t>(hi_k - 1)] : inf};
}

bool contains_set(const PredictionSet& big, const PredictionSet& small) {
    return std::includes(big.begin(), big.end(), small.begin(), small.end());
}

} // namespace

TEST_CASE("error level bounds") {
    CHECK_THROWS_AS(ErrorLevel(0.0), InvalidInput);
    CHECK_THROWS_AS(ErrorLevel(1.0), InvalidInput);
    CHECK_THROWS_AS(ErrorLevel(1.5), InvalidInput);
    CHECK_THROWS_AS(ErrorLevel(std::nan("")), InvalidInput);
    CHECK(upper_rank(4, ErrorLevel(0.25)) == 4);
    CHECK(upper_rank(9, ErrorLevel(0.1)) == 9);   // 10 * 0.9 is 9 up to rounding
    CHECK(upper_rank(2, ErrorLevel(0.1)) == 3);
    CHECK(conformal_quantile(std::vector<double>{1, 2}, ErrorLevel(0.1)) == inf);
}

TEST_CASE("baseline sets: hand-enumerated threshold") {
    // true-label probabilities 0.9, 0.8, 0.7, 0.6 give scores 0.1..0.4
    Matrix val{{0.9, 0.1}, {0.2, 0.8}, {0.7, 0.3}, {0.4, 0.6}};
    const std::vector<int> y{0, 1, 0, 1};
    auto sets = baseline_sets(val, y, Matrix{{0.7, 0.3}, {0.55, 0.45}}, ErrorLevel(0.25));
    CHECK(sets[0] == PredictionSet{0});
    CHECK(sets[1].empty());

    auto all = baseline_sets(Matrix{{0.9, 0.1}, {0.1, 0.9}}, std::vector<int>{0, 1},
                             Matrix{{0.99, 0.01}}, ErrorLevel(0.1));
    CHECK(all[0] == PredictionSet{0, 1});
}

TEST_CASE("baseline sets reject malformed input") {
    CHECK_THROWS_AS(baseline_sets(Matrix{{0.5, 0.6}}, std::vector<int>{0}, Matrix{{0.5, 0.5}}, ErrorLevel(0.1)), InvalidInput);
    CHECK_THROWS_AS(baseline_sets(Matrix{{0.5, 0.5}}, std::vector<int>{2}, Matrix{{0.5, 0.5}}, ErrorLevel(0.1)), InvalidInput);
    CHECK_THROWS_AS(baseline_sets(Matrix{{0.5, 0.5}}, std::vector<int>{0}, Matrix{{0.3, 0.3, 0.4}}, ErrorLevel(0.1)), InvalidInput);
}

TEST_CASE("aps set construction") {
    const std::vector<double> row{0.5, 0.3, 0.2};
    CHECK(aps_set(row, 0.8) == PredictionSet{0, 1});
    CHECK(aps_set(row, 0.5) == PredictionSet{0});
    CHECK(aps_set(row, 0.51) == PredictionSet{0, 1});
    CHECK(aps_set(row, 1.0) == PredictionSet{0, 1, 2});
    CHECK(aps_set(row, 7.0) == PredictionSet{0, 1, 2});
    CHECK(aps_set(row, inf) == PredictionSet{0, 1, 2});
    CHECK(aps_set(std::vector<double>{0.2, 0.5, 0.3}, 0.8) == PredictionSet{1, 2});

    CHECK(std::abs(aps_score(row, 1, 1.0) - 0.8) < 1e-15);
    CHECK(std::abs(aps_score(row, 1, 0.5) - 0.65) < 1e-15);
    CHECK(aps_score(row, 0, 1.0) == 0.5);

    // randomized: boundary class 1 kept iff u * 0.3 <= 0.7 - 0.5
    CHECK(aps_set_randomized(row, 0.7, 0.5) == PredictionSet{0, 1});
    CHECK(aps_set_randomized(row, 0.7, 0.9) == PredictionSet{0});
    CHECK(aps_set_randomized(row, 0.4, 0.9).empty());
}

TEST_CASE("split conformal coverage on exchangeable data") {
    Rng rng(100);
    for (double alpha : {0.1, 0.2}) {
        double base_cov = 0, aps_cov = 0, rand_cov = 0;
        const int trials = 200;
        for (int t = 0; t < trials; ++t) {
            auto val = synth::classification(rng, 200, 4);
            auto test = synth::classification(rng, 200, 4);
            base_cov += metrics::set_metrics(baseline_sets(val.probs, val.labels, test.probs, ErrorLevel(alpha)), test.labels).coverage;
            aps_cov += metrics::set_metrics(adaptive_sets(val.probs, val.labels, test.probs, ErrorLevel(alpha)), test.labels).coverage;
            rand_cov += metrics::set_metrics(adaptive_sets(val.probs, val.labels, test.probs, ErrorLevel(alpha),
                                                           ApsMode::randomized, static_cast<std::uint64_t>(t)),
                                             test.labels).coverage;
        }
        CHECK(base_cov / trials >= 1 - alpha - 0.02);
        CHECK(aps_cov / trials >= 1 - alpha - 0.02);
        CHECK(rand_cov / trials >= 1 - alpha - 0.02);
    }
}

TEST_CASE("sets grow as alpha shrinks and follow relabeling") {
    Rng rng(7);
    auto val = synth::classification(rng, 60, 5);
    auto test = synth::classification(rng, 40, 5);
    const std::vector<double> alphas{0.05, 0.1, 0.2, 0.3, 0.5};
    for (std::size_t a = 0; a + 1 < alphas.size(); ++a) {
        auto b_lo = baseline_sets(val.probs, val.labels, test.probs, ErrorLevel(alphas[a]));
        auto b_hi = baseline_sets(val.probs, val.labels, test.probs, ErrorLevel(alphas[a + 1]));
        auto s_lo = adaptive_sets(val.probs, val.labels, test.probs, ErrorLevel(alphas[a]));
        auto s_hi = adaptive_sets(val.probs, val.labels, test.probs, ErrorLevel(alphas[a + 1]));
        for (std::size_t i = 0; i < b_lo.size(); ++i) {
            CHECK(contains_set(b_lo[i], b_hi[i]));
            CHECK(contains_set(s_lo[i], s_hi[i]));
        }
    }

    // relabel: new column c holds old column perm[c]
    const std::vector<std::size_t> perm{3, 0, 4, 1, 2};
    std::vector<std::size_t> inverse(5);
    for (std::size_t c = 0; c < 5; ++c) inverse[perm[c]] = c;
    auto relabel = [&](const Matrix& m) {
        Matrix out(m.rows(), m.cols());
        for (std::size_t r = 0; r < m.rows(); ++r)
            for (std::size_t c = 0; c < 5; ++c) out(r, c) = m(r, perm[c]);
        return out;
    };
    std::vector<int> val_labels;
    for (int y : val.labels) val_labels.push_back(static_cast<int>(inverse[static_cast<std::size_t>(y)]));
    for (bool adaptive : {false, true}) {
        auto orig = adaptive ? adaptive_sets(val.probs, val.labels, test.probs, ErrorLevel(0.1))
                             : baseline_sets(val.probs, val.labels, test.probs, ErrorLevel(0.1));
        auto moved = adaptive ? adaptive_sets(relabel(val.probs), val_labels, relabel(test.probs), ErrorLevel(0.1))
                              : baseline_sets(relabel(val.probs), val_labels, relabel(test.probs), ErrorLevel(0.1));
        for (std::size_t i = 0; i < orig.size(); ++i) {
            PredictionSet mapped;
            for (int c : orig[i]) mapped.push_back(static_cast<int>(inverse[static_cast<std::size_t>(c)]));
            std::sort(mapped.begin(), mapped.end());
            CHECK(mapped == moved[i]);
        }
    }
}

TEST_CASE("cqr examples") {
    const std::vector<double> lo(3, 0.0), hi(3, 1.0), y(3, 0.5);
    auto out = cqr_interval(lo, hi, y, std::vector<double>{0.0}, std::vector<double>{1.0}, ErrorLevel(0.5));
    CHECK(out[0].lower == 0.5);
    CHECK(out[0].upper == 0.5);
    CHECK_FALSE(out[0].collapsed);

    // Narrow test interval would invert under q = -0.5 and collapses to its midpoint.
    auto inv = cqr_interval(lo, hi, y, std::vector<double>{0.0}, std::vector<double>{0.4}, ErrorLevel(0.5));
    CHECK(inv[0].collapsed);
    CHECK(inv[0].lower == inv[0].upper);
    CHECK(std::abs(inv[0].lower - 0.2) < 1e-15);

    // Targets on the bounds give zero scores, hence q = 0 and unchanged intervals.
    auto same = cqr_interval(std::vector<double>{0, 1, 2}, std::vector<double>{1, 2, 3}, std::vector<double>{0, 2, 3},
                             std::vector<double>{-1.25, 4}, std::vector<double>{0.5, 9}, ErrorLevel(0.3));
    CHECK(same[0].lower == -1.25);
    CHECK(same[0].upper == 0.5);
    CHECK(same[1].lower == 4);
    CHECK(same[1].upper == 9);

    CHECK_THROWS_AS(cqr_interval(std::vector<double>{0, 1}, std::vector<double>{1}, std::vector<double>{0, 1},
                                 std::vector<double>{0}, std::vector<double>{1}, ErrorLevel(0.1)),
                    InvalidInput);
    CHECK_THROWS_AS(cqr_interval(std::vector<double>{2}, std::vector<double>{1}, std::vector<double>{0},
                                 std::vector<double>{0}, std::vector<double>{1}, ErrorLevel(0.1)),
                    InvalidInput);
}

TEST_CASE("cqr widths grow by exactly 2q") {
    Rng rng(12);
    auto val = synth::regression(rng, 99);
    auto test = synth::regression(rng, 50);
    std::vector<double> scores;
    for (std::size_t i = 0; i < val.y.size(); ++i) scores.push_back(std::max(val.lower[i] - val.y[i], val.y[i] - val.upper[i]));
    const double q = oracle::sorted_kth(scores, 90);  // ceil(100 * 0.9)
    auto out = cqr_interval(val.lower, val.upper, val.y, test.lower, test.upper, ErrorLevel(0.1));
    for (std::size_t i = 0; i < out.size(); ++i) {
        CHECK(std::abs(out[i].width() - ((test.upper[i] - test.lower[i]) + 2 * q)) < 1e-12);
    }
}

TEST_CASE("scalar-score intervals") {
    auto zero = scalar_score_interval(std::vector<double>{1, 2}, std::vector<double>{1, 1}, std::vector<double>{1, 2},
                                      std::vector<double>{5}, std::vector<double>{2}, ErrorLevel(0.4));
    CHECK(zero[0].lower == 5);
    CHECK(zero[0].upper == 5);

    // scores {1,2,3,4}, alpha 0.25 -> q = 4
    auto four = scalar_score_interval(std::vector<double>{0, 0, 0, 0}, std::vector<double>{1, 1, 1, 1},
                                      std::vector<double>{1, -2, 3, -4}, std::vector<double>{10},
                                      std::vector<double>{0.5}, ErrorLevel(0.25));
    CHECK(four[0].lower == 8);
    CHECK(four[0].upper == 12);

    // unit stds reduce to absolute-residual split conformal
    Rng rng(3);
    auto val = synth::regression(rng, 49);
    auto test = synth::regression(rng, 20);
    std::vector<double> ones_val(49, 1.0), ones_test(20, 1.0), resid;
    for (std::size_t i = 0; i < 49; ++i) resid.push_back(std::abs(val.y[i] - val.mean[i]));
    const double q = oracle::sorted_kth(resid, 45);  // ceil(50 * 0.9)
    auto iv = scalar_score_interval(val.mean, ones_val, val.y, test.mean, ones_test, ErrorLevel(0.1));
    for (std::size_t i = 0; i < 20; ++i) {
        CHECK(iv[i].lower == test.mean[i] - q);
        CHECK(iv[i].upper == test.mean[i] + q);
    }
    CHECK_THROWS_AS(scalar_score_interval(std::vector<double>{0}, std::vector<double>{0}, std::vector<double>{0},
                                          std::vector<double>{0}, std::vector<double>{1}, ErrorLevel(0.1)),
                    InvalidInput);
}

TEST_CASE("regression split conformal coverage") {
    Rng rng(44);
    double cqr = 0, scalar = 0;
    const int trials = 200;
    for (int t = 0; t < trials; ++t) {
        auto val = synth::regression(rng, 200);
        auto test = synth::regression(rng, 200);
        cqr += metrics::interval_metrics(cqr_interval(val.lower, val.upper, val.y, test.lower, test.upper, ErrorLevel(0.1)), test.y).coverage;
        scalar += metrics::interval_metrics(scalar_score_interval(val.mean, val.std, val.y, test.mean, test.std, ErrorLevel(0.1)), test.y).coverage;
    }
    CHECK(cqr / trials >= 0.88);
    CHECK(scalar / trials >= 0.88);
}

TEST_CASE("interval monotonicity in alpha") {
    Rng rng(8);
    auto val = synth::regression(rng, 80);
    auto test = synth::regression(rng, 30);
    auto ds = regression_data(val.x, val.y);
    const Matrix tx = Matrix::column_vector(test.x);
    const auto ridge = ridge_trainer(0.1);
    const std::vector<double> alphas{0.05, 0.1, 0.2, 0.4};
    for (std::size_t a = 0; a + 1 < alphas.size(); ++a) {
        const ErrorLevel lo(alphas[a]), hi(alphas[a + 1]);
        auto c1 = cqr_interval(val.lower, val.upper, val.y, test.lower, test.upper, lo);
        auto c2 = cqr_interval(val.lower, val.upper, val.y, test.lower, test.upper, hi);
        auto s1 = scalar_score_interval(val.mean, val.std, val.y, test.mean, test.std, lo);
        auto s2 = scalar_score_interval(val.mean, val.std, val.y, test.mean, test.std, hi);
        auto j1 = jackknife_plus(ridge, ds, tx, lo), j2 = jackknife_plus(ridge, ds, tx, hi);
        auto m1 = jackknife_minmax(ridge, ds, tx, lo), m2 = jackknife_minmax(ridge, ds, tx, hi);
        auto v1 = cv_plus(ridge, ds, 5, tx, lo), v2 = cv_plus(ridge, ds, 5, tx, hi);
        for (std::size_t i = 0; i < 30; ++i) {
            CHECK(c1[i].contains(c2[i]));
            CHECK(s1[i].contains(s2[i]));
            CHECK(j1[i].contains(j2[i]));
            CHECK(m1[i].contains(m2[i]));
            CHECK(v1[i].contains(v2[i]));
        }
    }
}

TEST_CASE("jackknife+ hand instance and brute-force oracle") {
    auto ds = regression_data({0, 1, 2}, {0, 0, 3});
    const Matrix x{{5.0}};
    // mu_{-i} = {1.5, 1.5, 0}, R = {1.5, 1.5, 3}: lows {0, 0, -3}, highs {3, 3, 3}
    auto a = jackknife_plus(mean_trainer(), ds, x, ErrorLevel(0.25));
    CHECK(a[0].lower == -3.0);
    CHECK(a[0].upper == 3.0);
    auto b = jackknife_plus(mean_trainer(), ds, x, ErrorLevel(0.5));
    CHECK(b[0].lower == 0.0);
    CHECK(b[0].upper == 3.0);

    Rng rng(21);
    for (int trial = 0; trial < 20; ++trial) {
        auto s = synth::regression(rng, 12);
        auto d = regression_data(s.x, s.y);
        auto t = synth::regression(rng, 3);
        const Matrix tx = Matrix::column_vector(t.x);
        for (double alpha : {0.1, 0.2, 0.35}) {
            auto got = jackknife_plus(ridge_trainer(0.5), d, tx, ErrorLevel(alpha));
            for (std::size_t j = 0; j < 3; ++j) {
                auto want = naive_jackknife_plus(ridge_trainer(0.5), d, tx, j, alpha);
                CHECK(std::abs(got[j].lower - want.lower) < 1e-12);
                CHECK(std::abs(got[j].upper - want.upper) < 1e-12);
            }
        }
    }
}

TEST_CASE("constant predictors give degenerate intervals") {
    auto ds = regression_data({0, 1, 2, 3, 4}, {2, 2, 2, 2, 2});
    const Matrix x{{0.5}, {9.0}};
    for (const auto& iv : {jackknife_plus(mean_trainer(), ds, x, ErrorLevel(0.4)),
                           jackknife_minmax(mean_trainer(), ds, x, ErrorLevel(0.4)),
                           cv_plus(mean_trainer(), ds, 2, x, ErrorLevel(0.4))}) {
        for (const auto& i : iv) {
            CHECK(i.lower == 2.0);
            CHECK(i.upper == 2.0);
        }
    }
}

TEST_CASE("jackknife-minmax contains jackknife+") {
    Rng rng(5150);
    for (int trial = 0; trial < 30; ++trial) {
        auto s = synth::regression(rng, 15 + rng.below(20));
        auto d = regression_data(s.x, s.y);
        auto t = synth::regression(rng, 10);
        const Matrix tx = Matrix::column_vector(t.x);
        const ErrorLevel alpha(0.05 + 0.3 * rng.uniform());
        auto plus = jackknife_plus(ridge_trainer(0.2), d, tx, alpha);
        auto mm = jackknife_minmax(ridge_trainer(0.2), d, tx, alpha);
        for (std::size_t j = 0; j < tx.rows(); ++j) CHECK(mm[j].contains(plus[j]));
    }
}

TEST_CASE("jackknife coverage, mean predictor") {
    Rng rng(77);
    double plus = 0, mm = 0;
    const int trials = 200;
    const double alpha = 0.1;
    for (int t = 0; t < trials; ++t) {
        auto s = synth::regression(rng, 50);
        auto test = synth::regression(rng, 50);
        auto d = regression_data(s.x, s.y);
        const Matrix tx = Matrix::column_vector(test.x);
        plus += metrics::interval_metrics(jackknife_plus(mean_trainer(), d, tx, ErrorLevel(alpha)), test.y).coverage;
        mm += metrics::interval_metrics(jackknife_minmax(mean_trainer(), d, tx, ErrorLevel(alpha)), test.y).coverage;
    }
    CHECK(plus / trials >= 1 - 2 * alpha);
    CHECK(mm / trials >= 1 - alpha - 0.02);
}

TEST_CASE("cv+ folds") {
    auto folds = cv_folds(10, 3, 9);
    REQUIRE(folds.size() == 3);
    CHECK(folds[0].size() == 4);
    CHECK(folds[1].size() == 3);
    CHECK(folds[2].size() == 3);
    std::vector<std::size_t> all;
    for (auto& f : folds) all.insert(all.end(), f.begin(), f.end());
    std::sort(all.begin(), all.end());
    for (std::size_t i = 0; i < 10; ++i) CHECK(all[i] == i);
    CHECK(cv_folds(10, 3, 9) == folds);
    CHECK_THROWS_AS(cv_folds(3, 4, 0), InvalidInput);
    CHECK_THROWS_AS(cv_folds(3, 1, 0), InvalidInput);
}

TEST_CASE("cv+ with K = n reproduces jackknife+") {
    Rng rng(1);
    auto s = synth::regression(rng, 17);
    auto d = regression_data(s.x, s.y);
    const Matrix tx{{-0.3}, {0.0}, {0.8}};
    for (std::uint64_t seed : {0u, 5u, 123u}) {
        auto cv = cv_plus(ridge_trainer(0.3), d, 17, tx, ErrorLevel(0.2), {seed, Execution::serial});
        auto jk = jackknife_plus(ridge_trainer(0.3), d, tx, ErrorLevel(0.2));
        for (std::size_t j = 0; j < 3; ++j) {
            CHECK(cv[j].lower == jk[j].lower);
            CHECK(cv[j].upper == jk[j].upper);
        }
    }
}

TEST_CASE("cv+ K=2, n=4 mean predictor by enumeration") {
    auto d = regression_data({0, 1, 2, 3}, {0, 2, 4, 10});
    const auto folds = cv_folds(4, 2, 42);
    // Oracle: each point is scored by the mean of the other fold.
    std::vector<double> lows, highs;
    for (std::size_t f = 0; f < 2; ++f) {
        const auto& other = folds[1 - f];
        const double mu = (d.targets[other[0]] + d.targets[other[1]]) / 2.0;
        for (auto i : folds[f]) {
            const double r = std::abs(d.targets[i] - mu);
            lows.push_back(mu - r);
            highs.push_back(mu + r);
        }
    }
    std::sort(lows.begin(), lows.end());
    std::sort(highs.begin(), highs.end());
    // alpha = 0.4, n = 4: upper rank ceil(3) = 3, lower rank floor(2) = 2
    auto got = cv_plus(mean_trainer(), d, 2, Matrix{{7.0}}, ErrorLevel(0.4), {42, Execution::serial});
    CHECK(got[0].lower == lows[1]);
    CHECK(got[0].upper == highs[2]);
    CHECK_THROWS_AS(cv_plus(mean_trainer(), d, 5, Matrix{{7.0}}, ErrorLevel(0.4)), InvalidInput);
}

TEST_CASE("trainer failures carry the held-out index") {
    auto d = regression_data({0, 1, 2, 3}, {0, 1, 2, 3});
    Trainer flaky = [](const Matrix& x, std::span<const double> y, std::uint64_t) -> Predictor {
        // fails only when row with target 2 is held out
        if (std::find(y.begin(), y.end(), 2.0) == y.end()) throw std::runtime_error("boom");
        return mean_trainer()(x, y, 0);
    };
    for (auto exec : {Execution::serial, Execution::parallel}) {
        try {
            jackknife_plus(flaky, d, Matrix{{0.0}}, ErrorLevel(0.3), {0, exec});
            FAIL("expected TrainerError");
        } catch (const TrainerError& e) {
            CHECK(e.index() == 2);
            CHECK(std::string(e.what()).find("boom") != std::string::npos);
        }
    }
}

TEST_CASE("parallel leave-out fits equal sequential ones") {
    Rng rng(31);
    auto s = synth::regression(rng, 40);
    auto d = regression_data(s.x, s.y);
    const Matrix tx{{-0.5}, {0.25}};
    // Seed-dependent trainer: adds a seed-derived offset, so split seeds must match too.
    Trainer seeded = [](const Matrix& x, std::span<const double> y, std::uint64_t seed) -> Predictor {
        auto base = ridge_trainer(0.1)(x, y, seed);
        const double jitter = 1e-3 * Rng(seed).uniform();
        return [base, jitter](const Matrix& in) {
            auto p = base(in);
            for (double& v : p) v += jitter;
            return p;
        };
    };
    for (std::uint64_t seed : {1u, 2u}) {
        auto a = jackknife_plus(seeded, d, tx, ErrorLevel(0.1), {seed, Execution::serial});
        auto b = jackknife_plus(seeded, d, tx, ErrorLevel(0.1), {seed, Execution::parallel});
        auto c = cv_plus(seeded, d, 4, tx, ErrorLevel(0.1), {seed, Execution::serial});
        auto e = cv_plus(seeded, d, 4, tx, ErrorLevel(0.1), {seed, Execution::parallel});
        for (std::size_t j = 0; j < 2; ++j) {
            CHECK(a[j].lower == b[j].lower);
            CHECK(a[j].upper == b[j].upper);
            CHECK(c[j].lower == e[j].lower);
            CHECK(c[j].upper == e[j].upper);
        }
    }
}
