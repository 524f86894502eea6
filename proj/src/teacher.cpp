// Copyright (c) 2026, The gkd Authors
// SPDX-License-Identifier: Apache-2.0

#include "gkd/teacher.h"

#include "gkd/errors.h"
#include "gkd/metrics.h"
#include "gkd/rng.h"

#include <cmath>

namespace gkd {

using nlohmann::json;

namespace {

enum TeacherSlot : std::size_t { kGcn0, kGcn1, kHeadW1, kHeadB1, kHeadW2, kHeadB2, kTeacherSlots };

constexpr std::uint64_t kInitStream = 1;
constexpr std::uint64_t kShuffleStream = 2;

void check_params(std::span<const Var> params) {
    if (params.size() != kTeacherSlots) throw ConfigError("teacher expects 6 parameter tensors");
}

}  // namespace

Var gcn_layer(Var adj, Var h, Var w, Activation activation) {
    Var out = matmul(matmul(adj, h), w);
    return activation == Activation::relu ? relu(out) : out;
}

Var average_pool(Var h) { return mean_rows(h); }

Var mlp_head(Var pooled, Var w1, Var b1, Var w2, Var b2) {
    return add_row(matmul(relu(add_row(matmul(pooled, w1), b1)), w2), b2);
}

Var cross_entropy_loss(Var logits, std::size_t label) { return cross_entropy(logits, label); }

Tensor glorot_uniform(std::size_t rows, std::size_t cols, Rng& rng) {
    const double r = std::sqrt(6.0 / static_cast<double>(rows + cols));
    Tensor t(rows, cols);
    for (double& v : t.data()) v = rng.uniform(-r, r);
    return t;
}

TeacherModel init_teacher(std::size_t dim, std::size_t classes, const TeacherConfig& config) {
    if (dim == 0 || config.hidden == 0 || config.head_hidden == 0) throw ConfigError("teacher sizes must be positive");
    if (classes < 2) throw ConfigError("teacher needs at least 2 classes");
    TeacherModel m;
    m.dim = dim;
    m.classes = classes;
    m.config = config;
    Rng rng(derive_seed(config.seed, kInitStream));
    m.params.add("gcn0", glorot_uniform(dim, config.hidden, rng));
    m.params.add("gcn1", glorot_uniform(config.hidden, config.hidden, rng));
    m.params.add("head_w1", glorot_uniform(config.hidden, config.head_hidden, rng));
    m.params.add("head_b1", Tensor(1, config.head_hidden));
    m.params.add("head_w2", glorot_uniform(config.head_hidden, classes, rng));
    m.params.add("head_b2", Tensor(1, classes));
    return m;
}

Var teacher_pooled(std::span<const Var> params, Var normalized_adjacency, Var features) {
    check_params(params);
    Var h1 = gcn_layer(normalized_adjacency, features, params[kGcn0], Activation::relu);
    Var h2 = gcn_layer(normalized_adjacency, h1, params[kGcn1], Activation::identity);
    return average_pool(h2);
}

Var teacher_logits(Tape& tape, std::span<const Var> params, const Subgraph& graph) {
    check_params(params);
    Var adj = tape.constant(normalize_adjacency(graph.adjacency));
    Var x = tape.constant(graph.features());
    Var pooled = teacher_pooled(params, adj, x);
    return mlp_head(pooled, params[kHeadW1], params[kHeadB1], params[kHeadW2], params[kHeadB2]);
}

namespace {

void check_graph(const TeacherModel& model, const Subgraph& g) {
    if (g.dim() != model.dim) {
        throw ConfigError("subgraph '" + g.sample_id + "' has dimension " + std::to_string(g.dim()) + ", teacher expects " +
                          std::to_string(model.dim));
    }
}

std::vector<Var> bind_constants(Tape& tape, const ParameterSet& params) {
    std::vector<Var> vars;
    for (const Tensor& t : params.values) vars.push_back(tape.constant(t));
    return vars;
}

}  // namespace

Tensor teacher_predict(const TeacherModel& model, const Subgraph& graph) {
    check_graph(model, graph);
    Tape tape;
    auto vars = bind_constants(tape, model.params);
    return teacher_logits(tape, vars, graph).value();
}

TeacherRun train_teacher(std::span<const Subgraph> train, std::span<const Subgraph> val, std::size_t classes,
                         const TeacherConfig& config) {
    if (train.empty()) throw ConfigError("teacher training split is empty");
    const std::size_t dim = train.front().dim();
    TeacherRun run{init_teacher(dim, classes, config), {}};
    TeacherModel& model = run.model;
    for (const auto* split : {&train, &val})
        for (const Subgraph& g : *split) {
            check_graph(model, g);
            if (g.label >= classes) throw ConfigError("subgraph '" + g.sample_id + "' has a label outside the vocabulary");
        }

    // Per-sample constants are fixed across epochs.
    std::vector<Tensor> adjs, feats;
    for (const Subgraph& g : train) {
        adjs.push_back(normalize_adjacency(g.adjacency));
        feats.push_back(g.features());
    }

    Optimizer optimizer(config.optimizer);
    Rng shuffler(derive_seed(config.seed, kShuffleStream));
    std::vector<std::size_t> order(train.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
        shuffler.shuffle(order);
        double total = 0.0;
        for (std::size_t idx : order) {
            Tape tape;
            std::vector<Var> leaves;
            for (const Tensor& t : model.params.values) leaves.push_back(tape.parameter(t));
            Var pooled = teacher_pooled(leaves, tape.constant(adjs[idx]), tape.constant(feats[idx]));
            Var logits = mlp_head(pooled, leaves[kHeadW1], leaves[kHeadB1], leaves[kHeadW2], leaves[kHeadB2]);
            Var loss = cross_entropy_loss(logits, train[idx].label);
            total += loss.value()[0];
            const GradientTable grads = backward(tape, loss);
            std::vector<Tensor> g;
            g.reserve(leaves.size());
            for (const Var& leaf : leaves) g.push_back(grads[leaf]);
            optimizer.step(model.params.values, g);
        }
        EpochMetrics m{epoch, total / static_cast<double>(train.size()), std::nullopt};
        if (!val.empty()) {
            std::vector<std::size_t> preds, labels;
            for (const Subgraph& g : val) {
                preds.push_back(argmax(teacher_predict(model, g).data()));
                labels.push_back(g.label);
            }
            m.val_micro_f1 = micro_f1(preds, labels);
        }
        run.history.push_back(m);
    }
    return run;
}

json to_json(const OptimizerConfig& c) {
    return {{"kind", to_string(c.kind)}, {"lr", c.learning_rate}, {"beta1", c.beta1}, {"beta2", c.beta2}, {"epsilon", c.epsilon}};
}

OptimizerConfig optimizer_from_json(const json& j) {
    OptimizerConfig c;
    c.kind = parse_optimizer_kind(j.at("kind").get<std::string>());
    c.learning_rate = j.at("lr").get<double>();
    c.beta1 = j.at("beta1").get<double>();
    c.beta2 = j.at("beta2").get<double>();
    c.epsilon = j.at("epsilon").get<double>();
    return c;
}

json history_to_json(std::span<const EpochMetrics> history) {
    json out = json::array();
    for (const auto& m : history) {
        out.push_back({{"epoch", m.epoch},
                       {"train_loss", m.train_loss},
                       {"val_micro_f1", m.val_micro_f1 ? json(*m.val_micro_f1) : json(nullptr)}});
    }
    return out;
}

Checkpoint to_checkpoint(const TeacherModel& model, std::span<const EpochMetrics> history) {
    Checkpoint cp;
    cp.metadata = {{"model", "teacher"},
                   {"name", "teacher"},
                   {"dim", model.dim},
                   {"classes", model.classes},
                   {"hidden", model.config.hidden},
                   {"head_hidden", model.config.head_hidden},
                   {"epochs", model.config.epochs},
                   {"seed", model.config.seed},
                   {"optimizer", to_json(model.config.optimizer)},
                   {"graph_config", model.graph_config},
                   {"history", history_to_json(history)}};
    cp.params = model.params;
    return cp;
}

TeacherModel teacher_from_checkpoint(const Checkpoint& cp) {
    const json& m = cp.metadata;
    if (m.value("model", "") != "teacher") throw ConfigError("checkpoint does not hold a teacher");
    TeacherModel model;
    try {
        model.dim = m.at("dim").get<std::size_t>();
        model.classes = m.at("classes").get<std::size_t>();
        model.config.hidden = m.at("hidden").get<std::size_t>();
        model.config.head_hidden = m.at("head_hidden").get<std::size_t>();
        model.config.epochs = m.at("epochs").get<std::size_t>();
        model.config.seed = m.at("seed").get<std::uint64_t>();
        model.config.optimizer = optimizer_from_json(m.at("optimizer"));
        model.graph_config = m.value("graph_config", json());
    } catch (const json::exception& e) {
        throw ConfigError(std::string("teacher checkpoint metadata: ") + e.what());
    }
    const TeacherModel shape = init_teacher(model.dim, model.classes, model.config);
    if (cp.params.names != shape.params.names) throw ConfigError("teacher checkpoint tensor manifest mismatch");
    for (std::size_t i = 0; i < shape.params.size(); ++i)
        if (!cp.params.values[i].same_shape(shape.params.values[i]))
            throw ConfigError("teacher tensor '" + cp.params.names[i] + "' has the wrong shape");
    model.params = cp.params;
    return model;
}

}  // namespace gkd
