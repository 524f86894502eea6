// Copyright (c) 2026, The gkd Authors
// SPDX-License-Identifier: Apache-2.0
//
// Evaluation reports and baseline-vs-treated comparisons. Reports are JSON
// documents with sorted keys so repeated runs are byte-identical.

#pragma once

#include "gkd/distill.h"
#include "gkd/graph.h"
#include "gkd/metrics.h"
#include "gkd/student.h"
#include "gkd/teacher.h"

#include "json.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace gkd {

using AnyModel = std::variant<TeacherModel, StudentModel>;

AnyModel model_from_checkpoint(const Checkpoint& checkpoint);
AnyModel load_model(const std::filesystem::path& path);
/// Logits for one subgraph; students read only its content nodes.
Tensor model_logits(const AnyModel& model, const Subgraph& graph);
std::string model_name(const AnyModel& model);

struct ClassMetrics {
    std::string label;
    std::size_t support = 0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

struct GroupMetrics {
    std::string group;
    std::size_t samples = 0;
    double micro_f1 = 0.0;
};

struct EvalReport {
    std::string model_name;
    std::string split;
    std::size_t samples = 0;
    double micro_f1 = 0.0;
    double accuracy = 0.0;
    std::vector<ClassMetrics> per_class;
    std::vector<GroupMetrics> groups;
    std::vector<std::vector<std::size_t>> confusion;  // [true][predicted]
    nlohmann::json config;
    std::uint64_t seed = 0;
};

/// Argmax predictions (ties to the lowest class) over the graphs in `split`
/// (all graphs when nullopt). Throws InputError when nothing is left after
/// filtering and ConfigError when the model does not fit the graphs.
EvalReport evaluate_model(const AnyModel& model, std::span<const Subgraph> graphs, std::optional<Split> split,
                          std::span<const std::string> labels, std::size_t threads = 1);

nlohmann::json to_json(const EvalReport& report);
EvalReport report_from_json(const nlohmann::json& j);
void write_report(const EvalReport& report, const std::filesystem::path& path);
EvalReport read_report(const std::filesystem::path& path);

struct ComparisonRun {
    std::string name;
    EvalReport report;
    std::optional<std::string> baseline;  // name of the run this one is compared against
};

struct ComparisonRow {
    std::string baseline;
    std::string treated;
    /// Scores in percent, aligned with ComparisonReport::groups; nullopt if the group is absent.
    std::vector<std::optional<double>> baseline_groups;
    std::vector<std::optional<double>> treated_groups;
    std::vector<std::optional<double>> group_deltas;
    double baseline_average = 0.0;  // sample-weighted (overall micro-F1), percent
    double treated_average = 0.0;
    double delta = 0.0;  // treated_average - baseline_average
};

struct ComparisonReport {
    std::vector<std::string> groups;
    std::vector<ComparisonRow> rows;
};

/// One row per run that names a baseline. Throws InputError on a dangling
/// baseline reference.
ComparisonReport comparison_report(std::span<const ComparisonRun> runs);
nlohmann::json to_json(const ComparisonReport& report);
/// Fixed-width plain-text table.
std::string render_table(const ComparisonReport& report);

}  // namespace gkd
