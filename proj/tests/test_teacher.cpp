// Copyright (c) 2026, The gkd Authors
// SPDX-License-Identifier: Apache-2.0

#include "gkd/checkpoint.h"
#include "gkd/errors.h"
#include "gkd/fixtures.h"
#include "gkd/teacher.h"

#include "doctest.h"
#include "test_support.h"

#include <cmath>
#include <numeric>

using namespace gkd;

namespace {

std::vector<Var> bind(Tape& tape, const ParameterSet& params) {
    std::vector<Var> vars;
    for (const Tensor& t : params.values) vars.push_back(tape.constant(t));
    return vars;
}

TeacherConfig tiny_config(std::uint64_t seed = 0) {
    TeacherConfig c;
    c.hidden = 8;
    c.head_hidden = 8;
    c.epochs = 2;
    c.seed = seed;
    return c;
}

}  // namespace

TEST_CASE("gcn layer worked cases") {
    Tape tape;
    const Tensor h = Tensor::from_rows({{0.5, 2.0}, {1.0, 0.0}});
    const Var eye = tape.constant(Tensor::identity(2));
    CHECK(gcn_layer(eye, tape.constant(h), eye, Activation::relu).value() == h);

    const Var half = tape.constant(Tensor::from_rows({{0.5, 0.5}, {0.5, 0.5}}));
    const Var h2 = tape.constant(Tensor::from_rows({{2, 0}, {0, 2}}));
    CHECK(gcn_layer(half, h2, eye, Activation::identity).value() == Tensor::from_rows({{1, 1}, {1, 1}}));

    const Var neg = tape.constant(Tensor::from_rows({{-1, -2}, {-3, -0.5}}));
    CHECK(gcn_layer(eye, neg, eye, Activation::relu).value() == Tensor::zeros(2, 2));
}

TEST_CASE("average pool worked cases") {
    Tape tape;
    CHECK(average_pool(tape.constant(Tensor::from_rows({{0, 2}, {2, 0}}))).value() == Tensor::from_rows({{1, 1}}));
    CHECK(average_pool(tape.constant(Tensor::from_rows({{3, -1}, {3, -1}, {3, -1}}))).value() ==
          Tensor::from_rows({{3, -1}}));
    CHECK(average_pool(tape.constant(Tensor::from_rows({{4, 5, 6}}))).value() == Tensor::from_rows({{4, 5, 6}}));
}

TEST_CASE("mlp head worked cases") {
    Tape tape;
    const Var pooled = tape.constant(Tensor::from_rows({{1, 2}}));
    const Var z = mlp_head(pooled, tape.constant(Tensor(2, 3)), tape.constant(Tensor(1, 3)), tape.constant(Tensor(3, 4)),
                           tape.constant(Tensor(1, 4)));
    CHECK(z.value() == Tensor::zeros(1, 4));

    // relu((1, 2) I + (0, -3)) = (1, 0); (1, 0) [[2, 1], [0, 1]] + (0.5, 0) = (2.5, 1).
    const Var logits = mlp_head(pooled, tape.constant(Tensor::identity(2)), tape.constant(Tensor::from_rows({{0, -3}})),
                                tape.constant(Tensor::from_rows({{2, 1}, {0, 1}})),
                                tape.constant(Tensor::from_rows({{0.5, 0}})));
    CHECK(logits.value() == Tensor::from_rows({{2.5, 1.0}}));
}

TEST_CASE("cross entropy worked cases") {
    Tape tape;
    CHECK(cross_entropy_loss(tape.constant(Tensor(1, 4)), 2).value()(0, 0) == doctest::Approx(std::log(4.0)).epsilon(1e-9));
    CHECK(cross_entropy_loss(tape.constant(Tensor::from_rows({{std::log(3.0), 0}})), 0).value()(0, 0) ==
          doctest::Approx(0.2877).epsilon(1e-4));
    const double strong = cross_entropy_loss(tape.constant(Tensor::from_rows({{800, 0, -800}})), 0).value()(0, 0);
    CHECK(std::isfinite(strong));
    CHECK(strong < 1e-12);
    const double wrong = cross_entropy_loss(tape.constant(Tensor::from_rows({{800, 0, -800}})), 2).value()(0, 0);
    CHECK(wrong == doctest::Approx(1600.0));
}

TEST_CASE("teacher logits have one entry per class") {
    const Subgraph g = fixture_subgraph(1, 3, 5, 3);
    for (std::size_t classes : {2u, 3u, 7u}) {
        const TeacherModel m = init_teacher(5, classes, tiny_config());
        const Tensor logits = teacher_predict(m, g);
        CHECK(logits.rows() == 1);
        CHECK(logits.cols() == classes);
    }
}

TEST_CASE("full teacher loss passes gradcheck on a 6-node subgraph") {
    const auto results = model_gradchecks(0);
    REQUIRE(results.front().name == "teacher");
    CHECK(results.front().max_rel_error <= 1e-4);
}

TEST_CASE("teacher forward is permutation equivariant") {
    const Subgraph g = fixture_subgraph(4, 5, 6, 3);
    const TeacherModel m = init_teacher(6, 3, tiny_config(2));
    const std::size_t n = g.nodes.size();
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    Rng rng(5);
    rng.shuffle(perm);
    Subgraph p = g;
    for (std::size_t i = 0; i < n; ++i) {
        p.nodes[i] = g.nodes[perm[i]];
        for (std::size_t j = 0; j < n; ++j) p.adjacency(i, j) = g.adjacency(perm[i], perm[j]);
    }
    Tape tape;
    const auto vars = bind(tape, m.params);
    const Tensor a = teacher_pooled(vars, tape.constant(normalize_adjacency(g.adjacency)), tape.constant(g.features())).value();
    const Tensor b = teacher_pooled(vars, tape.constant(normalize_adjacency(p.adjacency)), tape.constant(p.features())).value();
    CHECK(max_abs_diff(a, b) <= 1e-9);
}

TEST_CASE("identity adjacency with identical features pools to the single-node result") {
    const TeacherModel m = init_teacher(4, 2, tiny_config(3));
    const Tensor row = Tensor::from_rows({{0.5, -0.25, 1.0, 0.1}});
    const Tensor rows = Tensor::from_rows({{0.5, -0.25, 1.0, 0.1}, {0.5, -0.25, 1.0, 0.1}, {0.5, -0.25, 1.0, 0.1}});
    Tape tape;
    const auto vars = bind(tape, m.params);
    const Tensor many = teacher_pooled(vars, tape.constant(Tensor::identity(3)), tape.constant(rows)).value();
    const Tensor one = teacher_pooled(vars, tape.constant(Tensor::identity(1)), tape.constant(row)).value();
    CHECK(max_abs_diff(many, one) <= 1e-12);
}

TEST_CASE("glorot init stays within its range and biases start at zero") {
    const TeacherModel m = init_teacher(10, 3, tiny_config(8));
    const double bound = std::sqrt(6.0 / (10 + 8));
    for (double x : m.params.at("gcn0").data()) CHECK(std::abs(x) <= bound);
    CHECK(m.params.at("head_b1") == Tensor::zeros(1, 8));
    CHECK(m.params.names == std::vector<std::string>{"gcn0", "gcn1", "head_w1", "head_b1", "head_w2", "head_b2"});
}

TEST_CASE("teacher training is deterministic and zero epochs returns the init") {
    const GraphSet set = test::synthetic_graphs(test::small_synth());
    const auto train = filter_split(set.graphs, Split::train);
    const auto val = filter_split(set.graphs, Split::val);
    const TeacherRun a = train_teacher(train, val, set.labels.size(), tiny_config(1));
    const TeacherRun b = train_teacher(train, val, set.labels.size(), tiny_config(1));
    CHECK(bitwise_equal(a.model.params, b.model.params));
    CHECK(encode_checkpoint(to_checkpoint(a.model, a.history)) == encode_checkpoint(to_checkpoint(b.model, b.history)));
    REQUIRE(a.history.size() == 2);
    CHECK(a.history[0].val_micro_f1.has_value());

    TeacherConfig zero = tiny_config(1);
    zero.epochs = 0;
    const TeacherRun z = train_teacher(train, val, set.labels.size(), zero);
    CHECK(bitwise_equal(z.model.params, init_teacher(set.dim, set.labels.size(), zero).params));
    CHECK(z.history.empty());
}

TEST_CASE("teacher training rejects inconsistent inputs") {
    const GraphSet set = test::synthetic_graphs(test::small_synth());
    const auto train = filter_split(set.graphs, Split::train);
    CHECK_THROWS(train_teacher(std::vector<Subgraph>{}, {}, 4, tiny_config()));
    std::vector<Subgraph> mixed(train.begin(), train.begin() + 3);
    mixed.push_back(fixture_subgraph(1, 2, 5, 4));
    CHECK_THROWS_AS(train_teacher(mixed, {}, 4, tiny_config()), ConfigError);
}

TEST_CASE("first-epoch teacher loss beats uniform guessing on the default dataset") {
    const GraphSet set = test::synthetic_graphs(SynthConfig{});
    TeacherConfig c;
    c.epochs = 1;
    const TeacherRun run = train_teacher(filter_split(set.graphs, Split::train), {}, set.labels.size(), c);
    CHECK(run.history[0].train_loss < std::log(static_cast<double>(set.labels.size())));
}

TEST_CASE("teacher checkpoints round trip") {
    TeacherModel m = init_teacher(5, 3, tiny_config(6));
    m.graph_config = {{"k", 3}};
    const std::vector<EpochMetrics> history{{1, 0.9, 0.5}, {2, 0.7, std::nullopt}};
    const Checkpoint cp = to_checkpoint(m, history);
    const std::string bytes = encode_checkpoint(cp);
    const Checkpoint back = decode_checkpoint(bytes);
    CHECK(encode_checkpoint(back) == bytes);
    const TeacherModel m2 = teacher_from_checkpoint(back);
    CHECK(bitwise_equal(m2.params, m.params));
    CHECK(m2.config.hidden == 8);
    CHECK(m2.graph_config == m.graph_config);
    CHECK(back.metadata.at("model") == "teacher");
    CHECK(back.metadata.at("history").size() == 2);

    Checkpoint wrong = cp;
    wrong.params.values[0] = Tensor(2, 2);
    CHECK_THROWS_AS(teacher_from_checkpoint(wrong), ConfigError);
}
