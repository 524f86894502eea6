// Copyright (c) 2026, The gkd Authors
// SPDX-License-Identifier: Apache-2.0
//
// Graph teacher: two GCN layers over a subgraph, mean pooling over nodes, and
// a two-layer MLP head producing class logits. Trained with cross-entropy,
// one subgraph per optimizer step.

#pragma once

#include "gkd/autodiff.h"
#include "gkd/checkpoint.h"
#include "gkd/graph.h"
#include "gkd/optimizer.h"
#include "gkd/parameters.h"
#include "gkd/rng.h"

#include "json.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace gkd {

enum class Activation { relu, identity };

/// act(adj * h * w), tape-tracked.
Var gcn_layer(Var adj, Var h, Var w, Activation activation);

/// Column mean over nodes: N x d -> 1 x d.
Var average_pool(Var h);

/// linear -> relu -> linear; returns raw logits.
Var mlp_head(Var pooled, Var w1, Var b1, Var w2, Var b2);

struct TeacherConfig {
    std::size_t hidden = 64;
    std::size_t head_hidden = 64;
    std::size_t epochs = 30;
    OptimizerConfig optimizer;
    std::uint64_t seed = 0;
};

struct TeacherModel {
    std::size_t dim = 0;
    std::size_t classes = 0;
    TeacherConfig config;
    /// Tensors in order: gcn0 (dim x hidden), gcn1 (hidden x hidden),
    /// head_w1 (hidden x head_hidden), head_b1, head_w2 (head_hidden x classes), head_b2.
    ParameterSet params;
    nlohmann::json graph_config;
};

/// Seeded Glorot-uniform weights, zero biases.
TeacherModel init_teacher(std::size_t dim, std::size_t classes, const TeacherConfig& config);

/// Pooled graph embedding (1 x hidden) from a normalised adjacency and node features.
Var teacher_pooled(std::span<const Var> params, Var normalized_adjacency, Var features);
/// Class logits for one subgraph; `params` are leaves in ParameterSet order.
Var teacher_logits(Tape& tape, std::span<const Var> params, const Subgraph& graph);
/// Inference without gradient tracking.
Tensor teacher_predict(const TeacherModel& model, const Subgraph& graph);

/// -log softmax(logits)[label].
Var cross_entropy_loss(Var logits, std::size_t label);

struct EpochMetrics {
    std::size_t epoch = 0;
    double train_loss = 0.0;
    std::optional<double> val_micro_f1;
};

struct TeacherRun {
    TeacherModel model;
    std::vector<EpochMetrics> history;
};

/// Trains from a seeded init over seeded-shuffled epochs; returns the final
/// epoch's parameters. Throws ConfigError on inconsistent dims or an empty train split.
TeacherRun train_teacher(std::span<const Subgraph> train, std::span<const Subgraph> val, std::size_t classes,
                         const TeacherConfig& config);

Checkpoint to_checkpoint(const TeacherModel& model, std::span<const EpochMetrics> history = {});
TeacherModel teacher_from_checkpoint(const Checkpoint& checkpoint);

nlohmann::json history_to_json(std::span<const EpochMetrics> history);
nlohmann::json to_json(const OptimizerConfig& config);
OptimizerConfig optimizer_from_json(const nlohmann::json& j);

/// Seeded uniform(-r, r) with r = sqrt(6 / (rows + cols)).
Tensor glorot_uniform(std::size_t rows, std::size_t cols, Rng& rng);

}  // namespace gkd
