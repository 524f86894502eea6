// Copyright (c) 2026, The gkd Authors
// SPDX-License-Identifier: Apache-2.0
//
// Soft-label distillation from frozen graph teachers into raw-feature students.
// Per training sample the student minimises
//   cross_entropy(student, label) + kd_weight * KL(mean_j softmax(T_j / tau) || softmax(S / tau)) * tau^2
// where the tau^2 factor applies only when tau != 1.

#pragma once

#include "gkd/checkpoint.h"
#include "gkd/student.h"
#include "gkd/teacher.h"

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace gkd {

/// Mean over teachers of row_softmax(logits / temperature), 1 x classes.
/// Throws ConfigError when teachers disagree with each other or the subgraph.
Tensor teacher_soft_labels(std::span<const TeacherModel> teachers, const Subgraph& graph, double temperature = 1.0);

/// KL(p_teacher || softmax(logits / temperature)), scaled by temperature^2
/// when temperature != 1. Zero-probability teacher entries contribute nothing.
/// Throws ShapeError on width mismatch, InputError when p_teacher is not a distribution.
Var kd_loss(const Tensor& p_teacher, Var student_logits, double temperature = 1.0);
double kd_loss_value(const Tensor& p_teacher, const Tensor& student_logits, double temperature = 1.0);

/// l_sce + kd_weight * l_kd. Throws ConfigError for a negative weight.
Var combined_loss(Var l_sce, Var l_kd, double kd_weight);
double combined_loss(double l_sce, double l_kd, double kd_weight);

struct DistillConfig {
    StudentKind kind = StudentKind::mlp;
    std::size_t hidden = 64;
    double kd_weight = 1.0;
    double temperature = 1.0;
    std::size_t epochs = 30;
    OptimizerConfig optimizer;
    std::uint64_t seed = 0;
    std::size_t threads = 1;  // soft-label precomputation only
};

struct StudentRun {
    StudentModel model;
    std::vector<EpochMetrics> history;
};

/// Distils `teachers` into a fresh student. Teachers are read-only. With
/// kd_weight = 0 this reduces exactly to train_supervised.
StudentRun train_student(std::span<const Subgraph> train, std::span<const Subgraph> val,
                         std::span<const TeacherModel> teachers, const DistillConfig& config);

/// Cross-entropy-only student training (the no-teacher baseline).
StudentRun train_supervised(std::span<const Subgraph> train, std::span<const Subgraph> val, std::size_t classes,
                            const DistillConfig& config);

Checkpoint to_checkpoint(const StudentModel& model, std::span<const EpochMetrics> history = {});
StudentModel student_from_checkpoint(const Checkpoint& checkpoint);

/// Precomputed teacher distributions keyed by sample id.
/// GSLB container: "GSLB" | u32 version = 1 | u64 count | u32 classes |
/// per sample: u16 id length, id bytes, classes x f64. Little-endian.
struct SoftLabelCache {
    std::size_t classes = 0;
    std::vector<std::string> ids;
    std::vector<Tensor> rows;  // each 1 x classes
};

SoftLabelCache build_soft_label_cache(std::span<const TeacherModel> teachers, std::span<const Subgraph> graphs,
                                      double temperature, std::size_t threads = 1);
std::string encode_soft_labels(const SoftLabelCache& cache);
SoftLabelCache decode_soft_labels(std::string_view bytes);
void write_soft_labels(const SoftLabelCache& cache, const std::filesystem::path& path);
SoftLabelCache read_soft_labels(const std::filesystem::path& path);

}  // namespace gkd
