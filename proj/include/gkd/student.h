// Copyright (c) 2026, The gkd Authors
// SPDX-License-Identifier: Apache-2.0
//
// Raw-feature students. Both see only the four content-node embeddings of a
// sample, never commonsense nodes or adjacency.
//
//   mlp:          flatten(4 x dim) -> linear -> relu -> linear
//   transformer:  tokens + kind embeddings -> single-head self-attention with
//                 residual -> position-wise feed-forward with residual ->
//                 mean over tokens -> linear

#pragma once

#include "gkd/autodiff.h"
#include "gkd/optimizer.h"
#include "gkd/parameters.h"

#include "json.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>

namespace gkd {

enum class StudentKind { mlp, transformer };

std::string to_string(StudentKind kind);
StudentKind parse_student_kind(std::string_view text);

struct StudentModel {
    StudentKind kind = StudentKind::mlp;
    std::size_t dim = 0;
    std::size_t classes = 0;
    std::size_t hidden = 64;
    ParameterSet params;
    nlohmann::json train_config;  // config echo written into checkpoints
};

StudentModel init_student(StudentKind kind, std::size_t dim, std::size_t classes, std::size_t hidden, std::uint64_t seed);

struct StudentOutput {
    Var logits;
    std::optional<Var> attention;  // 4 x 4 attention weights, transformer only
};

/// `content` must be 4 x dim in fixed kind order (ShapeError otherwise).
/// `params` are leaves in the model's ParameterSet order.
StudentOutput student_forward(const StudentModel& model, std::span<const Var> params, Var content);

/// Inference without gradient tracking.
Tensor student_predict(const StudentModel& model, const Tensor& content);

}  // namespace gkd
