#include <doctest.h>

#include <cmath>
#include <limits>
#include <numeric>

#include "oracles.hpp"
#include "random_functions.hpp"
#include "uqkit/autodiff.hpp"
#include "uqkit/error.hpp"
#include "uqkit/kernels.hpp"
#include "uqkit/prob.hpp"
#include "uqkit/rng.hpp"

using namespace uqkit;

TEST_CASE("softmax examples") {
    auto p = softmax(std::vector<double>{0.0, 0.0});
    CHECK(p[0] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(p[1] == doctest::Approx(0.5).epsilon(1e-15));

    for (double x : {-700.0, -3.0, 0.0, 42.0, 900.0}) {
        auto q = softmax(std::vector<double>{x, x, x});
        for (double v : q) CHECK(std::abs(v - 1.0 / 3.0) < 1e-15);
    }

    auto r = softmax(std::vector<double>{std::log(3.0), 0.0});
    CHECK(std::abs(r[0] - 0.75) < 1e-15);
    CHECK(std::abs(r[1] - 0.25) < 1e-15);
}

TEST_CASE("softmax rejects bad input") {
    CHECK_THROWS_AS(softmax(std::vector<double>{}), InvalidInput);
    CHECK_THROWS_AS(softmax(std::vector<double>{1.0, std::nan("")}), InvalidInput);
    CHECK_THROWS_AS(softmax(std::vector<double>{std::numeric_limits<double>::infinity(), 0.0}), InvalidInput);
}

TEST_CASE("softmax normalizes and is shift invariant") {
    Rng rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t k = 1 + rng.below(9);
        std::vector<double> v(k), shifted(k);
        const double c = 50.0 * rng.standard_normal();
        for (std::size_t i = 0; i < k; ++i) {
            v[i] = 5.0 * rng.standard_normal();
            shifted[i] = v[i] + c;
        }
        auto p = softmax(v);
        auto q = softmax(shifted);
        CHECK(std::abs(std::accumulate(p.begin(), p.end(), 0.0) - 1.0) < 1e-12);
        for (std::size_t i = 0; i < k; ++i) {
            CHECK(p[i] > 0.0);
            CHECK(std::abs(p[i] - q[i]) < 1e-12);
        }
    }
}

TEST_CASE("log_sum_exp") {
    CHECK(log_sum_exp(std::vector<double>{0.0}) == 0.0);
    CHECK(std::abs(log_sum_exp(std::vector<double>{2.5, 2.5}) - (2.5 + std::log(2.0))) < 1e-15);
    const double big = log_sum_exp(std::vector<double>{1000.0, 1000.0});
    CHECK(std::isfinite(big));
    CHECK(std::abs(big - (1000.0 + std::log(2.0))) < 1e-12);
    CHECK_THROWS_AS(log_sum_exp(std::vector<double>{}), InvalidInput);

    const double ninf = -std::numeric_limits<double>::infinity();
    CHECK(std::abs(log_sum_exp(std::vector<double>{3.0, ninf, 3.0, ninf, 3.0}) - (3.0 + std::log(3.0))) < 1e-14);

    Rng rng(5);
    for (int i = 0; i < 100; ++i) {
        std::vector<double> v(1 + rng.below(6));
        for (double& x : v) x = 10 * rng.standard_normal();
        CHECK(log_sum_exp(v) >= *std::max_element(v.begin(), v.end()));
    }
}

TEST_CASE("kth_smallest") {
    const std::vector<double> v{0.3, 0.1, 0.2};
    CHECK(kth_smallest(v, 1) == 0.1);
    CHECK(kth_smallest(v, 3) == 0.3);
    CHECK(kth_smallest(std::vector<double>{5, 5, 1}, 2) == 5);
    CHECK_THROWS_AS(kth_smallest(v, 0), std::out_of_range);
    CHECK_THROWS_AS(kth_smallest(v, 4), std::out_of_range);

    Rng rng(99);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> s(1 + rng.below(30));
        // coarse values force ties
        for (double& x : s) x = static_cast<double>(rng.below(7));
        const std::size_t k = 1 + rng.below(s.size());
        const double expected = oracle::sorted_kth(s, k);
        auto perm = rng.permutation(s.size());
        std::vector<double> shuffled;
        for (auto i : perm) shuffled.push_back(s[i]);
        CHECK(kth_smallest(s, k) == expected);
        CHECK(kth_smallest(shuffled, k) == expected);
    }
}

TEST_CASE("rng determinism, ranges and child streams") {
    Rng a(1234), b(1234);
    const double a1 = a.standard_normal(), a2 = a.standard_normal();
    CHECK(a1 == b.standard_normal());
    CHECK(a2 == b.standard_normal());

    Rng u(7);
    for (int i = 0; i < 100000; ++i) {
        const double x = u.uniform();
        REQUIRE(x >= 0.0);
        REQUIRE(x < 1.0);
    }

    Rng c0 = Rng::child(42, 0), c1 = Rng::child(42, 1), c0b = Rng::child(42, 0);
    bool differ = false;
    for (int i = 0; i < 8; ++i) {
        const auto x = c0.next_u64();
        differ |= x != c1.next_u64();
        CHECK(x == c0b.next_u64());
    }
    CHECK(differ);
    CHECK(derive_seed(42, 0) != derive_seed(42, 1));
    CHECK(derive_seed(42, 0) != derive_seed(43, 0));
}

TEST_CASE("standard normal mean over 1e6 draws") {
    Rng rng(2024);
    double s = 0.0, s2 = 0.0;
    const int n = 1000000;
    for (int i = 0; i < n; ++i) {
        const double z = rng.standard_normal();
        s += z;
        s2 += z * z;
    }
    CHECK(std::abs(s / n) <= 0.01);
    CHECK(std::abs(s2 / n - 1.0) <= 0.01);
}

TEST_CASE("permutation covers every index") {
    Rng rng(3);
    auto p = rng.permutation(257);
    std::vector<std::size_t> sorted = p;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < sorted.size(); ++i) CHECK(sorted[i] == i);
}

TEST_CASE("value_and_grad basic identities") {
    auto sq = ad::value_and_grad([](ad::Tape&, ad::Var x) { return ad::sum(x * x); }, std::vector<double>{3.0});
    CHECK(sq.value == 9.0);
    CHECK(sq.grad[0] == 6.0);

    auto lin = ad::value_and_grad([](ad::Tape&, ad::Var x) { return ad::sum(x); },
                                  std::vector<double>{-1.0, 2.0, 0.5, 7.0});
    for (double g : lin.grad) CHECK(g == 1.0);

    CHECK_THROWS_AS(ad::value_and_grad([](ad::Tape&, ad::Var x) { return ad::sum(x); },
                                       std::vector<double>{std::nan("")}),
                    InvalidInput);
}

TEST_CASE("subgradient conventions") {
    auto r = ad::value_and_grad([](ad::Tape&, ad::Var x) { return ad::sum(ad::relu(x)); },
                                std::vector<double>{-1.0, 0.0, 2.0});
    CHECK(r.grad == std::vector<double>{0.0, 0.0, 1.0});

    auto m = ad::value_and_grad([](ad::Tape&, ad::Var x) { return ad::sum(ad::max_rows(x)); },
                                std::vector<double>{1.0, 4.0, 4.0, 2.0});
    CHECK(m.value == 4.0);
    CHECK(m.grad == std::vector<double>{0.0, 1.0, 0.0, 0.0});
}

namespace {

// Softmax-regression NLL on fixed data, theta = [W (d x K) | b (K)].
struct SoftmaxProblem {
    Matrix x;
    std::vector<int> y;
    std::size_t d = 3, k = 3;

    ad::Var loss(ad::Tape& tape, ad::Var theta) const {
        using namespace ad;
        Var w = slice(theta, 0, d, k);
        Var b = slice(theta, d * k, 1, k);
        Var logits = matmul(tape.constant(x), w) + b;
        Var m = max_rows(logits);
        Var lse = log(sum_rows(exp(logits - m))) + m;
        Matrix onehot(x.rows(), k);
        for (std::size_t i = 0; i < y.size(); ++i) onehot(i, static_cast<std::size_t>(y[i])) = 1.0;
        Var picked = sum_rows(logits * tape.constant(onehot));
        return mean(lse - picked);
    }

    double plain(std::span<const double> theta) const {
        double total = 0.0;
        for (std::size_t i = 0; i < x.rows(); ++i) {
            std::vector<double> logits(k);
            for (std::size_t c = 0; c < k; ++c) {
                logits[c] = theta[d * k + c];
                for (std::size_t j = 0; j < d; ++j) logits[c] += x(i, j) * theta[j * k + c];
            }
            total += log_sum_exp(logits) - logits[static_cast<std::size_t>(y[i])];
        }
        return total / static_cast<double>(x.rows());
    }
};

} // namespace

TEST_CASE("softmax classifier NLL gradient matches finite differences") {
    Rng rng(77);
    SoftmaxProblem prob;
    prob.x = Matrix(5, prob.d);
    for (double& v : prob.x.flat()) v = rng.standard_normal();
    for (int i = 0; i < 5; ++i) prob.y.push_back(static_cast<int>(rng.below(prob.k)));
    std::vector<double> theta(prob.d * prob.k + prob.k);
    for (double& v : theta) v = 0.7 * rng.standard_normal();

    auto vg = ad::value_and_grad([&](ad::Tape& t, ad::Var th) { return prob.loss(t, th); }, theta);
    CHECK(std::abs(vg.value - prob.plain(theta)) < 1e-12);
    auto fd = oracle::central_difference([&](std::span<const double> th) { return prob.plain(th); }, theta);
    CHECK(oracle::gradients_match(vg.grad, fd, 1e-5, 1e-8));
}

TEST_CASE("100 random composed functions: autodiff vs central differences") {
    Rng rng(31337);
    int passed = 0;
    for (int trial = 0; trial < 100; ++trial) {
        auto f = testfn::make_random_function(rng);
        std::vector<double> theta(f.dim);
        for (double& v : theta) v = 0.5 * rng.standard_normal();
        auto vg = ad::value_and_grad([&](ad::Tape& t, ad::Var x) { return testfn::apply(f, t, x); }, theta);
        CHECK(std::abs(vg.value - testfn::evaluate(f, theta)) <= 1e-10 * (1.0 + std::abs(vg.value)));
        auto fd = oracle::central_difference([&](std::span<const double> x) { return testfn::evaluate(f, x); }, theta);
        if (oracle::gradients_match(vg.grad, fd, 1e-5, 1e-8)) ++passed;
    }
    CHECK(passed == 100);
}

TEST_CASE("backward with a vector seed gives a Jacobian row") {
    ad::Tape tape;
    ad::Var x = tape.variable(Matrix::row_vector(std::vector<double>{1.0, 2.0}));
    ad::Var y = x * x;  // 1x2
    tape.backward(y, Matrix(1, 2, std::vector<double>{0.0, 1.0}));
    CHECK(tape.grad(x)(0, 0) == 0.0);
    CHECK(tape.grad(x)(0, 1) == 4.0);
    CHECK_THROWS_AS(tape.backward(y), InvalidInput);
}

TEST_CASE("broadcast gradients reduce over the broadcast axis") {
    ad::Tape tape;
    ad::Var a = tape.variable(Matrix{{1, 2}, {3, 4}, {5, 6}});
    ad::Var bias = tape.variable(Matrix{{10, 20}});
    ad::Var col = tape.variable(Matrix{{1}, {2}, {3}});
    ad::Var out = ad::sum((a + bias) * col);
    tape.backward(out);
    CHECK(tape.grad(bias) == Matrix{{6, 6}});
    CHECK(tape.grad(col) == Matrix{{33}, {37}, {41}});
    CHECK(tape.grad(a) == Matrix{{1, 1}, {2, 2}, {3, 3}});
}

TEST_CASE("parallel kernels are bit-identical to the serial reference") {
    Rng rng(8);
    for (auto [m, k, n] : {std::tuple{3, 4, 5}, std::tuple{64, 48, 80}, std::tuple{200, 33, 70}}) {
        Matrix a(m, k), b(k, n), bt(n, k), at(k, m);
        for (auto* mat : {&a, &b, &bt, &at})
            for (double& v : mat->flat()) v = rng.standard_normal();
        CHECK(kernels::serial::gemm(a, b) == kernels::parallel::gemm(a, b));
        CHECK(kernels::serial::gemm_nt(a, bt) == kernels::parallel::gemm_nt(a, bt));
        CHECK(kernels::serial::gemm_tn(at, b) == kernels::parallel::gemm_tn(at, b));
        CHECK(kernels::serial::softmax_rows(a, 1.7) == kernels::parallel::softmax_rows(a, 1.7));

        // naive triple loop
        const Matrix c = kernels::serial::gemm(a, b);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < n; ++j) {
                double s = 0.0;
                for (int q = 0; q < k; ++q) s += a(i, q) * b(q, j);
                CHECK(std::abs(c(i, j) - s) < 1e-12);
            }
    }
    CHECK_THROWS_AS(kernels::serial::gemm(Matrix(2, 3), Matrix(2, 3)), InvalidInput);
}
