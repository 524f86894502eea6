// Copyright (c) 2026, The gkd Authors
// SPDX-License-Identifier: Apache-2.0

#include "gkd/eval.h"

#include "gkd/binary_io.h"
#include "gkd/errors.h"
#include "gkd/parallel.h"

#include <algorithm>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

namespace gkd {

using nlohmann::json;

AnyModel model_from_checkpoint(const Checkpoint& cp) {
    const std::string kind = cp.metadata.value("model", "");
    if (kind == "teacher") return teacher_from_checkpoint(cp);
    if (kind == "student") return student_from_checkpoint(cp);
    throw ConfigError("checkpoint metadata names unknown model type '" + kind + "'");
}

AnyModel load_model(const std::filesystem::path& path) { return model_from_checkpoint(read_checkpoint(path)); }

Tensor model_logits(const AnyModel& model, const Subgraph& graph) {
    return std::visit(
        [&graph](const auto& m) -> Tensor {
            using M = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<M, TeacherModel>) {
                return teacher_predict(m, graph);
            } else {
                if (graph.dim() != m.dim) {
                    throw ConfigError("subgraph '" + graph.sample_id + "' has dimension " + std::to_string(graph.dim()) +
                                      ", student expects " + std::to_string(m.dim));
                }
                return student_predict(m, graph.content_features());
            }
        },
        model);
}

std::string model_name(const AnyModel& model) {
    return std::visit(
        [](const auto& m) -> std::string {
            return to_checkpoint(m).metadata.at("name").template get<std::string>();
        },
        model);
}

namespace {

std::size_t model_classes(const AnyModel& model) {
    return std::visit([](const auto& m) { return m.classes; }, model);
}

json model_config(const AnyModel& model) {
    return std::visit(
        [](const auto& m) -> json {
            json meta = to_checkpoint(m).metadata;
            meta.erase("history");
            return meta;
        },
        model);
}

std::uint64_t model_seed(const AnyModel& model) {
    return std::visit(
        [](const auto& m) -> std::uint64_t {
            using M = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<M, TeacherModel>) {
                return m.config.seed;
            } else {
                return m.train_config.is_object() ? m.train_config.value("seed", std::uint64_t{0}) : 0;
            }
        },
        model);
}

double safe_ratio(std::size_t num, std::size_t den) {
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

EvalReport evaluate_model(const AnyModel& model, std::span<const Subgraph> graphs, std::optional<Split> split,
                          std::span<const std::string> labels, std::size_t threads) {
    std::vector<const Subgraph*> selected;
    for (const Subgraph& g : graphs)
        if (!split || g.split == *split) selected.push_back(&g);
    if (selected.empty()) {
        throw InputError("no samples to evaluate" + (split ? " in split '" + to_string(*split) + "'" : std::string()));
    }
    const std::size_t classes = model_classes(model);
    if (labels.size() != classes) {
        throw ConfigError("model predicts " + std::to_string(classes) + " classes but the graphs declare " +
                          std::to_string(labels.size()));
    }

    std::vector<std::size_t> preds(selected.size()), truth(selected.size());
    parallel_for(selected.size(), threads, [&](std::size_t i) {
        preds[i] = argmax(model_logits(model, *selected[i]).data());
        truth[i] = selected[i]->label;
        if (truth[i] >= classes) throw ConfigError("subgraph '" + selected[i]->sample_id + "' has a label outside the model's classes");
    });

    EvalReport r;
    r.model_name = model_name(model);
    r.split = split ? to_string(*split) : "all";
    r.samples = selected.size();
    r.micro_f1 = micro_f1(preds, truth);
    r.accuracy = accuracy(preds, truth);
    if (r.micro_f1 != r.accuracy) throw InvariantError("micro-F1 differs from accuracy for single-label predictions");

    r.confusion.assign(classes, std::vector<std::size_t>(classes, 0));
    for (std::size_t i = 0; i < preds.size(); ++i) ++r.confusion[truth[i]][preds[i]];
    std::size_t total = 0;
    for (std::size_t c = 0; c < classes; ++c) {
        std::size_t predicted = 0, support = 0;
        for (std::size_t k = 0; k < classes; ++k) {
            predicted += r.confusion[k][c];
            support += r.confusion[c][k];
        }
        total += support;
        ClassMetrics m;
        m.label = labels[c];
        m.support = support;
        m.precision = safe_ratio(r.confusion[c][c], predicted);
        m.recall = safe_ratio(r.confusion[c][c], support);
        m.f1 = (m.precision + m.recall) == 0.0 ? 0.0 : 2.0 * m.precision * m.recall / (m.precision + m.recall);
        r.per_class.push_back(m);
    }
    if (total != r.samples) throw InvariantError("confusion counts do not sum to the sample count");

    std::map<std::string, std::pair<std::vector<std::size_t>, std::vector<std::size_t>>> by_group;
    for (std::size_t i = 0; i < selected.size(); ++i) {
        auto& [p, t] = by_group[selected[i]->group];
        p.push_back(preds[i]);
        t.push_back(truth[i]);
    }
    for (const auto& [group, pt] : by_group) r.groups.push_back({group, pt.first.size(), micro_f1(pt.first, pt.second)});

    r.config = model_config(model);
    r.seed = model_seed(model);
    return r;
}

json to_json(const EvalReport& r) {
    json per_class = json::array();
    for (const auto& c : r.per_class)
        per_class.push_back({{"label", c.label}, {"support", c.support}, {"precision", c.precision}, {"recall", c.recall}, {"f1", c.f1}});
    json groups = json::array();
    for (const auto& g : r.groups) groups.push_back({{"group", g.group}, {"samples", g.samples}, {"micro_f1", g.micro_f1}});
    return {{"report", "evaluation"}, {"model", r.model_name}, {"split", r.split},     {"samples", r.samples},
            {"micro_f1", r.micro_f1}, {"accuracy", r.accuracy}, {"per_class", per_class}, {"groups", groups},
            {"confusion", r.confusion}, {"config", r.config},   {"seed", r.seed}};
}

EvalReport report_from_json(const json& j) {
    EvalReport r;
    try {
        if (j.value("report", "") != "evaluation") throw InputError("document is not an evaluation report");
        r.model_name = j.at("model").get<std::string>();
        r.split = j.at("split").get<std::string>();
        r.samples = j.at("samples").get<std::size_t>();
        r.micro_f1 = j.at("micro_f1").get<double>();
        r.accuracy = j.at("accuracy").get<double>();
        for (const auto& c : j.at("per_class"))
            r.per_class.push_back({c.at("label").get<std::string>(), c.at("support").get<std::size_t>(),
                                   c.at("precision").get<double>(), c.at("recall").get<double>(), c.at("f1").get<double>()});
        for (const auto& g : j.at("groups"))
            r.groups.push_back({g.at("group").get<std::string>(), g.at("samples").get<std::size_t>(), g.at("micro_f1").get<double>()});
        r.confusion = j.at("confusion").get<std::vector<std::vector<std::size_t>>>();
        r.config = j.at("config");
        r.seed = j.at("seed").get<std::uint64_t>();
    } catch (const json::exception& e) {
        throw InputError(std::string("malformed evaluation report: ") + e.what());
    }
    return r;
}

void write_report(const EvalReport& report, const std::filesystem::path& path) {
    write_file(path, to_json(report).dump(2) + "\n");
}

EvalReport read_report(const std::filesystem::path& path) {
    try {
        return report_from_json(json::parse(read_file(path)));
    } catch (const json::parse_error& e) {
        throw InputError("'" + path.string() + "' is not valid JSON: " + e.what());
    }
}

ComparisonReport comparison_report(std::span<const ComparisonRun> runs) {
    std::map<std::string, const ComparisonRun*> by_name;
    for (const auto& run : runs) {
        if (!by_name.emplace(run.name, &run).second) throw InputError("duplicate run name '" + run.name + "'");
    }
    ComparisonReport out;
    std::set<std::string> groups;
    for (const auto& run : runs)
        for (const auto& g : run.report.groups) groups.insert(g.group);
    out.groups.assign(groups.begin(), groups.end());

    auto group_score = [](const EvalReport& r, const std::string& group) -> std::optional<double> {
        for (const auto& g : r.groups)
            if (g.group == group) return 100.0 * g.micro_f1;
        return std::nullopt;
    };

    for (const auto& run : runs) {
        if (!run.baseline) continue;
        auto it = by_name.find(*run.baseline);
        if (it == by_name.end()) throw InputError("run '" + run.name + "' names unknown baseline '" + *run.baseline + "'");
        const EvalReport& base = it->second->report;
        ComparisonRow row;
        row.baseline = *run.baseline;
        row.treated = run.name;
        for (const auto& g : out.groups) {
            auto b = group_score(base, g);
            auto t = group_score(run.report, g);
            row.baseline_groups.push_back(b);
            row.treated_groups.push_back(t);
            row.group_deltas.push_back(b && t ? std::optional<double>(*t - *b) : std::nullopt);
        }
        row.baseline_average = 100.0 * base.micro_f1;
        row.treated_average = 100.0 * run.report.micro_f1;
        row.delta = row.treated_average - row.baseline_average;
        out.rows.push_back(std::move(row));
    }
    return out;
}

json to_json(const ComparisonReport& report) {
    auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
    json rows = json::array();
    for (const auto& r : report.rows) {
        json bg = json::array(), tg = json::array(), dg = json::array();
        for (std::size_t i = 0; i < report.groups.size(); ++i) {
            bg.push_back(opt(r.baseline_groups[i]));
            tg.push_back(opt(r.treated_groups[i]));
            dg.push_back(opt(r.group_deltas[i]));
        }
        rows.push_back({{"baseline", r.baseline},
                        {"treated", r.treated},
                        {"baseline_groups", bg},
                        {"treated_groups", tg},
                        {"group_deltas", dg},
                        {"baseline_average", r.baseline_average},
                        {"treated_average", r.treated_average},
                        {"delta", r.delta}});
    }
    return {{"report", "comparison"}, {"groups", report.groups}, {"rows", rows}};
}

std::string render_table(const ComparisonReport& report) {
    std::size_t name_width = 5;
    for (const auto& r : report.rows) name_width = std::max({name_width, r.baseline.size(), r.treated.size()});
    name_width += 2;
    constexpr int kCol = 9;

    std::ostringstream os;
    os << std::fixed << std::setprecision(2);
    auto cell = [&os](const std::optional<double>& v, bool sign = false) {
        if (!v) {
            os << std::setw(kCol) << "-";
        } else {
            std::ostringstream c;
            c << std::fixed << std::setprecision(2) << (sign && *v >= 0 ? "+" : "") << *v;
            os << std::setw(kCol) << c.str();
        }
    };
    os << std::left << std::setw(static_cast<int>(name_width)) << "Model" << std::right;
    for (const auto& g : report.groups) os << std::setw(kCol) << g;
    os << std::setw(kCol) << "AVG" << "\n";
    for (const auto& r : report.rows) {
        os << std::left << std::setw(static_cast<int>(name_width)) << r.baseline << std::right;
        for (const auto& v : r.baseline_groups) cell(v);
        cell(r.baseline_average);
        os << "\n" << std::left << std::setw(static_cast<int>(name_width)) << r.treated << std::right;
        for (const auto& v : r.treated_groups) cell(v);
        cell(r.treated_average);
        os << "\n" << std::left << std::setw(static_cast<int>(name_width)) << "  delta" << std::right;
        for (const auto& v : r.group_deltas) cell(v, true);
        cell(r.delta, true);
        os << "\n";
    }
    return os.str();
}

}  // namespace gkd
