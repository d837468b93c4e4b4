#include <doctest.h>

#include <bit>
#include <cmath>
#include <set>

#include "temp_dir.hpp"
#include "uqkit/csv.hpp"
#include "uqkit/data.hpp"
#include "uqkit/error.hpp"
#include "uqkit/rng.hpp"

using namespace uqkit;

TEST_CASE("load_csv infers classes") {
    TempDir dir;
    auto p = dir.write("a.csv", "x0,x1,target\n0.5,1e-3,0\n-2,3.25E2,2\n7,8,1\n");
    Dataset ds = load_csv(p, Task::classification, "target");
    CHECK(ds.size() == 3);
    CHECK(ds.dim() == 2);
    CHECK(ds.num_classes == 3);
    CHECK(ds.inputs(0, 1) == 1e-3);
    CHECK(ds.inputs(1, 1) == 325.0);
    CHECK(ds.labels == std::vector<int>{0, 2, 1});
    CHECK(ds.feature_names == std::vector<std::string>{"x0", "x1"});

    Dataset forced = load_csv(p, Task::classification, "target", 5);
    CHECK(forced.num_classes == 5);
    CHECK_THROWS_AS(load_csv(p, Task::classification, "target", 2), DataError);
}

TEST_CASE("load_csv target column may sit anywhere") {
    TempDir dir;
    auto p = dir.write("b.csv", "y,a,b\n1.5,1,2\n-0.5,3,4\n");
    Dataset ds = load_csv(p, Task::regression, "y");
    CHECK(ds.targets == std::vector<double>{1.5, -0.5});
    CHECK(ds.inputs == Matrix{{1, 2}, {3, 4}});
}

TEST_CASE("load_csv errors") {
    TempDir dir;
    auto bad = dir.write("bad.csv", "x0,x1,target\n1,abc,0\n");
    try {
        load_csv(bad, Task::classification, "target");
        FAIL("expected a parse error");
    } catch (const DataError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("row 2") != std::string::npos);
        CHECK(msg.find("column x1") != std::string::npos);
    }
    CHECK_THROWS_AS(load_csv(dir.write("empty.csv", ""), Task::classification, "target"), DataError);
    CHECK_THROWS_AS(load_csv(dir.write("hdr.csv", "x0,target\n"), Task::classification, "target"), DataError);
    CHECK_THROWS_AS(load_csv(dir.write("m.csv", "x0,x1\n1,2\n"), Task::classification, "target"), DataError);
    CHECK_THROWS_AS(load_csv(dir.write("neg.csv", "x0,target\n1,-1\n"), Task::classification, "target"), DataError);
    CHECK_THROWS_AS(load_csv(dir.write("frac.csv", "x0,target\n1,0.5\n"), Task::classification, "target"), DataError);
    CHECK_THROWS_AS(load_csv(dir.write("rag.csv", "x0,target\n1\n"), Task::classification, "target"), DataError);
    CHECK_THROWS_AS(load_csv(dir / "missing.csv", Task::classification, "target"), DataError);
}

TEST_CASE("csv round trip is bit-exact") {
    TempDir dir;
    Rng rng(17);
    Dataset ds;
    ds.task = Task::regression;
    ds.inputs = Matrix(40, 3);
    for (double& v : ds.inputs.flat()) v = std::ldexp(rng.standard_normal(), static_cast<int>(rng.below(80)) - 40);
    ds.inputs(0, 0) = 0.1;
    ds.inputs(1, 0) = -0.0;
    ds.inputs(2, 0) = 5e-324;
    for (int i = 0; i < 40; ++i) ds.targets.push_back(rng.uniform());
    write_csv(dir / "rt.csv", ds, "y");
    Dataset back = load_csv(dir / "rt.csv", Task::regression, "y");
    for (std::size_t i = 0; i < ds.inputs.size(); ++i) {
        CHECK(std::bit_cast<std::uint64_t>(back.inputs.flat()[i]) == std::bit_cast<std::uint64_t>(ds.inputs.flat()[i]));
    }
    CHECK(back.targets == ds.targets);
    CHECK(format_double(0.1) == "0.10000000000000001");
}

TEST_CASE("parse_double is locale independent and strict") {
    double v = 0;
    CHECK(parse_double("1.5e3", v));
    CHECK(v == 1500.0);
    CHECK(parse_double(" -2.5 ", v));
    CHECK(v == -2.5);
    CHECK_FALSE(parse_double("1,5", v));
    CHECK_FALSE(parse_double("", v));
    CHECK_FALSE(parse_double("3x", v));
}

namespace {
Dataset counting_dataset(std::size_t n) {
    Dataset ds;
    ds.task = Task::regression;
    ds.inputs = Matrix(n, 1);
    for (std::size_t i = 0; i < n; ++i) {
        ds.inputs(i, 0) = static_cast<double>(i);
        ds.targets.push_back(static_cast<double>(i));
    }
    return ds;
}

std::vector<std::size_t> ids(const Dataset& ds) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < ds.size(); ++i) out.push_back(static_cast<std::size_t>(ds.inputs(i, 0)));
    return out;
}
} // namespace

TEST_CASE("split sizes and determinism") {
    auto ds = counting_dataset(10);
    auto s = split(ds, {0.8, 0.1, 0.1}, 4);
    CHECK(s.train.size() == 8);
    CHECK(s.calib.size() == 1);
    CHECK(s.test.size() == 1);
    auto again = split(ds, {0.8, 0.1, 0.1}, 4);
    CHECK(ids(s.train) == ids(again.train));
    CHECK(ids(s.test) == ids(again.test));

    auto r = split(counting_dataset(11), {0.5, 0.25, 0.25}, 1);
    CHECK(r.calib.size() == 2);
    CHECK(r.test.size() == 2);
    CHECK(r.train.size() == 7);

    CHECK_THROWS_AS(split(ds, {0.9, 0.05, 0.05}, 1), InvalidInput);
    CHECK_THROWS_AS(split(ds, {0.5, 0.5, 0.5}, 1), InvalidInput);
    CHECK_THROWS_AS(split(ds, {1.0, 0.0, 0.0}, 1), InvalidInput);
}

TEST_CASE("split partitions rows for random (n, seed)") {
    Rng rng(9);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 10 + rng.below(200);
        const std::uint64_t seed = rng.next_u64();
        auto s = split(counting_dataset(n), {0.6, 0.2, 0.2}, seed);
        std::set<std::size_t> seen;
        for (const auto* part : {&s.train, &s.calib, &s.test})
            for (auto i : ids(*part)) CHECK(seen.insert(i).second);
        CHECK(seen.size() == n);
        CHECK(*seen.rbegin() == n - 1);
    }
}

TEST_CASE("batches") {
    auto ds = counting_dataset(5);
    BatchPlan plan{2, 123, false};
    auto b = batches(ds, plan, 0);
    REQUIRE(b.size() == 3);
    CHECK(b[0].rows.size() == 2);
    CHECK(b[1].rows.size() == 2);
    CHECK(b[2].rows.size() == 1);
    plan.drop_last = true;
    CHECK(batches(ds, plan, 0).size() == 2);

    auto big = counting_dataset(50);
    BatchPlan p{7, 5, false};
    auto e0 = batches(big, p, 0), e1 = batches(big, p, 1), e0b = batches(big, p, 0);
    std::vector<std::size_t> r0, r1, r0b;
    for (auto& x : e0) r0.insert(r0.end(), x.rows.begin(), x.rows.end());
    for (auto& x : e1) r1.insert(r1.end(), x.rows.begin(), x.rows.end());
    for (auto& x : e0b) r0b.insert(r0b.end(), x.rows.begin(), x.rows.end());
    CHECK(r0 == r0b);
    CHECK(r0 != r1);
    std::set<std::size_t> uniq(r0.begin(), r0.end());
    CHECK(uniq.size() == 50);
    for (auto& x : e0)
        for (std::size_t i = 0; i < x.rows.size(); ++i) CHECK(x.targets[i] == static_cast<double>(x.rows[i]));
    CHECK_THROWS_AS(batches(big, BatchPlan{0, 1, false}, 0), InvalidInput);
}

TEST_CASE("synthetic generators") {
    auto moons = synth_classification("two_moons", 101, 0.0, 3);
    CHECK(moons.num_classes == 2);
    for (std::size_t i = 0; i < moons.size(); ++i) {
        const double x = moons.inputs(i, 0), y = moons.inputs(i, 1);
        if (moons.labels[i] == 0) {
            CHECK(std::abs(x * x + y * y - 1.0) < 1e-12);
            CHECK(y >= -1e-12);
        } else {
            CHECK(std::abs((x - 1) * (x - 1) + (y - 0.5) * (y - 0.5) - 1.0) < 1e-12);
            CHECK(y <= 0.5 + 1e-12);
        }
    }
    auto blobs = synth_classification("gaussian_blobs", 100, 1.0, 3, 3);
    std::vector<int> counts(3, 0);
    for (int y : blobs.labels) counts[static_cast<std::size_t>(y)]++;
    for (int c : counts) CHECK(std::abs(c - 100 / 3.0) <= 1.0);

    auto a = synth_classification("two_moons", 64, 0.2, 11);
    auto b = synth_classification("two_moons", 64, 0.2, 11);
    CHECK(a.inputs == b.inputs);
    CHECK(a.labels == b.labels);
    CHECK_THROWS_AS(synth_classification("spirals", 10, 0.1, 1), InvalidInput);
    CHECK_THROWS_AS(synth_classification("two_moons", 1, 0.1, 1), InvalidInput);
    CHECK_THROWS_AS(synth_classification("two_moons", 10, -1, 1), InvalidInput);
}
