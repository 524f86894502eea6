// Copyright (c) 2026, The gkd Authors
// SPDX-License-Identifier: Apache-2.0

#include "gkd/autodiff.h"
#include "gkd/errors.h"
#include "gkd/gradcheck.h"
#include "gkd/optimizer.h"
#include "gkd/parallel.h"
#include "gkd/rng.h"
#include "gkd/tensor.h"

#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <limits>

using namespace gkd;

namespace {

Tensor random_tensor(Rng& rng, std::size_t r, std::size_t c) {
    Tensor t(r, c);
    for (double& x : t.data()) x = rng.normal();
    return t;
}

// Plain triple loop, independent of the kernel's loop order.
Tensor naive_matmul(const Tensor& a, const Tensor& b) {
    Tensor out(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < b.cols(); ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < a.cols(); ++k) s += a(i, k) * b(k, j);
            out(i, j) = s;
        }
    return out;
}

}  // namespace

TEST_CASE("matmul worked cases") {
    const Tensor m = Tensor::from_rows({{1, 2}, {3, 4}});
    CHECK(matmul(Tensor::identity(2), m) == m);
    CHECK(matmul(Tensor::zeros(2, 3), Tensor::ones(3, 2)) == Tensor::zeros(2, 2));
    CHECK(matmul(m, Tensor::from_rows({{5}, {6}})) == Tensor::from_rows({{17}, {39}}));
}

TEST_CASE("matmul agrees with a naive loop on random shapes") {
    Rng rng(3);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t r = 1 + rng.below(6), k = 1 + rng.below(6), c = 1 + rng.below(6);
        const Tensor a = random_tensor(rng, r, k), b = random_tensor(rng, k, c);
        CHECK(max_abs_diff(matmul(a, b), naive_matmul(a, b)) <= 1e-12);
    }
}

TEST_CASE("matmul shape mismatch names both shapes") {
    try {
        matmul(Tensor(2, 3), Tensor(2, 3));
        FAIL("expected ShapeError");
    } catch (const ShapeError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("2x3") != std::string::npos);
    }
}

TEST_CASE("row softmax values and shift invariance") {
    const Tensor s = row_softmax(Tensor::from_rows({{0, 0}, {1, 0}}));
    CHECK(s(0, 0) == doctest::Approx(0.5));
    CHECK(s(1, 0) == doctest::Approx(0.7311).epsilon(1e-4));
    CHECK(s(1, 1) == doctest::Approx(0.2689).epsilon(1e-4));

    Rng rng(5);
    const Tensor x = random_tensor(rng, 3, 4);
    Tensor shifted = x;
    for (double& v : shifted.data()) v += 123.0;
    CHECK(max_abs_diff(row_softmax(x), row_softmax(shifted)) <= 1e-12);
    const Tensor big = Tensor::from_rows({{1000, 0}});
    CHECK(row_softmax(big)(0, 0) == doctest::Approx(1.0));
}

TEST_CASE("tensor constructor validates element count") {
    CHECK_THROWS_AS(Tensor(2, 2, std::vector<double>{1, 2, 3}), ShapeError);
}

TEST_CASE("check_finite rejects NaN and infinity") {
    Tensor t(1, 2);
    CHECK_NOTHROW(check_finite(t, "t"));
    t(0, 1) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(check_finite(t, "t"), NumericError);
    t(0, 1) = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(check_finite(t, "t"), NumericError);
}

TEST_CASE("backward of sum gives ones; unrelated parameter gets zeros") {
    Tape tape;
    const Var w = tape.parameter(Tensor::from_rows({{1, 2}, {3, 4}}));
    const Var unused = tape.parameter(Tensor::ones(2, 2));
    const GradientTable g = backward(tape, sum(w));
    CHECK(g[w] == Tensor::ones(2, 2));
    CHECK(g[unused] == Tensor::zeros(2, 2));
}

TEST_CASE("gradients accumulate when a node is used twice") {
    Tape tape;
    const Var w = tape.parameter(Tensor::from_rows({{1.5, -2.0}}));
    const Var y = add(w, w);
    const GradientTable g = backward(tape, sum(y));
    CHECK(g[w] == Tensor::from_rows({{2.0, 2.0}}));
}

TEST_CASE("backward requires a scalar loss") {
    Tape tape;
    const Var w = tape.parameter(Tensor::ones(2, 2));
    CHECK_THROWS_AS(backward(tape, w), ShapeError);
}

TEST_CASE("gradcheck worked cases") {
    const ScalarFn square = [](Tape&, std::span<const Var> p) { return matmul(p[0], p[0]); };
    const std::vector<Tensor> theta{Tensor::from_rows({{3.0}})};
    CHECK(gradcheck(square, theta) <= 1e-8);

    const ScalarFn constant = [](Tape& tape, std::span<const Var>) { return tape.constant(Tensor::from_rows({{2.0}})); };
    CHECK(gradcheck(constant, theta) == 0.0);
    CHECK_THROWS_AS(gradcheck(square, theta, 0.0), ConfigError);
}

TEST_CASE("every differentiable op passes gradcheck") {
    Rng rng(11);
    const Tensor a = random_tensor(rng, 3, 4), b = random_tensor(rng, 4, 2), c = random_tensor(rng, 3, 4);
    const Tensor bias = random_tensor(rng, 1, 4), sq = random_tensor(rng, 3, 3);
    const Tensor weights = random_tensor(rng, 3, 2);

    // Random linear read-out so no gradient is trivially uniform.
    Tensor readout(64, 1);
    for (double& x : readout.data()) x = rng.normal();
    auto weighted = [](Var x, Tape& tape, const Tensor& r) {
        const std::size_t n = x.rows() * x.cols();
        std::vector<double> head(r.data().begin(), r.data().begin() + static_cast<std::ptrdiff_t>(n));
        return matmul(flatten(x), tape.constant(Tensor(n, 1, std::move(head))));
    };

    SUBCASE("matmul") {
        const ScalarFn f = [&](Tape& t, std::span<const Var> p) { return weighted(matmul(p[0], p[1]), t, readout); };
        CHECK(gradcheck(f, std::vector<Tensor>{a, b}) <= 1e-6);
    }
    SUBCASE("transpose and add") {
        const ScalarFn f = [&](Tape& t, std::span<const Var> p) { return weighted(transpose(add(p[0], p[1])), t, readout); };
        CHECK(gradcheck(f, std::vector<Tensor>{a, c}) <= 1e-6);
    }
    SUBCASE("add_row and scale") {
        const ScalarFn f = [&](Tape& t, std::span<const Var> p) { return weighted(scale(add_row(p[0], p[1]), -1.7), t, readout); };
        CHECK(gradcheck(f, std::vector<Tensor>{a, bias}) <= 1e-6);
    }
    SUBCASE("relu and mean_rows") {
        const ScalarFn f = [&](Tape& t, std::span<const Var> p) { return weighted(mean_rows(relu(p[0])), t, readout); };
        CHECK(gradcheck(f, std::vector<Tensor>{a}) <= 1e-6);
    }
    SUBCASE("row_softmax") {
        const ScalarFn f = [&](Tape& t, std::span<const Var> p) { return weighted(row_softmax(p[0]), t, readout); };
        CHECK(gradcheck(f, std::vector<Tensor>{sq}) <= 1e-6);
    }
    SUBCASE("cross_entropy") {
        const ScalarFn f = [&](Tape&, std::span<const Var> p) { return cross_entropy(matmul(flatten(p[0]), p[1]), 1); };
        const Tensor proj = random_tensor(rng, 6, 3);
        CHECK(gradcheck(f, std::vector<Tensor>{weights, proj}) <= 1e-6);
    }
}

TEST_CASE("cross entropy rejects an out-of-range label") {
    Tape tape;
    const Var logits = tape.parameter(Tensor(1, 3));
    CHECK_THROWS_AS(cross_entropy(logits, 3), InputError);
}

TEST_CASE("sgd and adam updates") {
    SUBCASE("sgd hand arithmetic") {
        OptimizerConfig c;
        c.kind = OptimizerKind::sgd;
        c.learning_rate = 0.1;
        Optimizer opt(c);
        std::vector<Tensor> w{Tensor::from_rows({{1.0}})};
        const std::vector<Tensor> g{Tensor::from_rows({{0.5}})};
        opt.step(w, g);
        CHECK(w[0](0, 0) == doctest::Approx(0.95).epsilon(1e-15));
    }
    SUBCASE("zero learning rate leaves parameters unchanged") {
        for (OptimizerKind kind : {OptimizerKind::sgd, OptimizerKind::adam}) {
            OptimizerConfig c;
            c.kind = kind;
            c.learning_rate = 0.0;
            Optimizer opt(c);
            std::vector<Tensor> w{Tensor::from_rows({{1.0, -2.0}})};
            const Tensor before = w[0];
            opt.step(w, std::vector<Tensor>{Tensor::from_rows({{0.3, 0.4}})});
            CHECK(bitwise_equal(w[0], before));
        }
    }
    SUBCASE("first adam step moves by about lr") {
        OptimizerConfig c;
        Optimizer opt(c);
        std::vector<Tensor> w{Tensor::from_rows({{1.0, 1.0, 1.0}})};
        opt.step(w, std::vector<Tensor>{Tensor::from_rows({{0.5, -3.0, 1e-3}})});
        CHECK(std::abs(w[0](0, 0) - 1.0) == doctest::Approx(0.001).epsilon(0.1));
        CHECK(std::abs(w[0](0, 1) - 1.0) == doctest::Approx(0.001).epsilon(0.1));
        CHECK(w[0](0, 1) > 1.0);
        CHECK(opt.steps() == 1);
    }
    SUBCASE("shape mismatch") {
        Optimizer opt(OptimizerConfig{});
        std::vector<Tensor> w{Tensor(1, 2)};
        CHECK_THROWS_AS(opt.step(w, std::vector<Tensor>{Tensor(2, 1)}), ShapeError);
    }
}

TEST_CASE("adam matches a reference implementation over several steps") {
    OptimizerConfig c;
    c.learning_rate = 0.01;
    Optimizer opt(c);
    std::vector<Tensor> w{Tensor::from_rows({{0.2}})};
    double ref = 0.2, m = 0.0, v = 0.0;
    for (int t = 1; t <= 5; ++t) {
        const double g = 2.0 * ref - 0.3 * t;
        opt.step(w, std::vector<Tensor>{Tensor::from_rows({{g}})});
        m = 0.9 * m + 0.1 * g;
        v = 0.999 * v + 0.001 * g * g;
        const double mh = m / (1.0 - std::pow(0.9, t)), vh = v / (1.0 - std::pow(0.999, t));
        ref -= 0.01 * mh / (std::sqrt(vh) + 1e-8);
        CHECK(w[0](0, 0) == doctest::Approx(ref).epsilon(1e-12));
    }
}

TEST_CASE("optimizer names parse") {
    CHECK(parse_optimizer_kind("adam") == OptimizerKind::adam);
    CHECK(parse_optimizer_kind("sgd") == OptimizerKind::sgd);
    CHECK_THROWS_AS(parse_optimizer_kind("rmsprop"), ConfigError);
    CHECK(default_learning_rate(OptimizerKind::sgd) == 0.01);
    CHECK(default_learning_rate(OptimizerKind::adam) == 0.001);
}

TEST_CASE("rng is reproducible and stays in range") {
    Rng a(42), b(42);
    for (int i = 0; i < 100; ++i) CHECK(a.next() == b.next());
    Rng r(1);
    for (int i = 0; i < 1000; ++i) {
        const double u = r.uniform();
        CHECK((u >= 0.0 && u < 1.0));
        CHECK(r.below(7) < 7);
    }
    CHECK(derive_seed(1, 2) != derive_seed(1, 3));
    CHECK(derive_seed(1, 2) == derive_seed(1, 2));

    std::vector<int> items{0, 1, 2, 3, 4, 5, 6, 7};
    Rng s(9);
    s.shuffle(items);
    std::vector<int> sorted = items;
    std::sort(sorted.begin(), sorted.end());
    CHECK(sorted == std::vector<int>{0, 1, 2, 3, 4, 5, 6, 7});
}

TEST_CASE("normal draws have roughly unit variance") {
    Rng r(2);
    double s = 0.0, s2 = 0.0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        const double x = r.normal();
        s += x;
        s2 += x * x;
    }
    CHECK(std::abs(s / n) < 0.05);
    CHECK(std::abs(s2 / n - 1.0) < 0.05);
}

TEST_CASE("parallel_for visits every index once for any thread count") {
    for (std::size_t threads : {1u, 2u, 3u, 8u}) {
        std::vector<int> hits(101, 0);
        parallel_for(hits.size(), threads, [&](std::size_t i) { hits[i] += 1; });
        for (int h : hits) CHECK(h == 1);
    }
}
