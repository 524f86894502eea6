// Copyright (c) 2026, The gkd Authors
// SPDX-License-Identifier: Apache-2.0

#include "gkd/distill.h"

#include "gkd/binary_io.h"
#include "gkd/errors.h"
#include "gkd/metrics.h"
#include "gkd/parallel.h"
#include "gkd/rng.h"

#include <cmath>
#include <limits>
#include <optional>

namespace gkd {

using nlohmann::json;

namespace {

constexpr std::uint64_t kShuffleStream = 12;

Tensor scaled(const Tensor& t, double temperature) {
    if (temperature == 1.0) return t;
    Tensor out = t;
    for (double& v : out.data()) v /= temperature;
    return out;
}

void check_temperature(double temperature) {
    if (!(temperature > 0.0) || !std::isfinite(temperature)) throw ConfigError("KD temperature must be positive");
}

void check_distribution(const Tensor& p) {
    if (p.rows() != 1) throw ShapeError("teacher distribution must be a single row, got " + p.shape_string());
    double total = 0.0;
    for (double v : p.data()) {
        if (!(v >= 0.0) || !std::isfinite(v)) throw InputError("teacher distribution has a negative or non-finite entry");
        total += v;
    }
    if (std::abs(total - 1.0) > 1e-6) throw InputError("teacher distribution sums to " + std::to_string(total));
}

}  // namespace

Tensor teacher_soft_labels(std::span<const TeacherModel> teachers, const Subgraph& graph, double temperature) {
    check_temperature(temperature);
    if (teachers.empty()) throw ConfigError("distillation needs at least one teacher");
    const std::size_t classes = teachers.front().classes;
    Tensor mean(1, classes);
    for (const TeacherModel& t : teachers) {
        if (t.classes != classes || t.dim != teachers.front().dim) throw ConfigError("teachers disagree on dim or class count");
        if (graph.dim() != t.dim) {
            throw ConfigError("subgraph '" + graph.sample_id + "' has dimension " + std::to_string(graph.dim()) +
                              ", teacher expects " + std::to_string(t.dim));
        }
        const Tensor p = row_softmax(scaled(teacher_predict(t, graph), temperature));
        for (std::size_t c = 0; c < classes; ++c) mean[c] += p[c];
    }
    const double inv = 1.0 / static_cast<double>(teachers.size());
    for (double& v : mean.data()) v *= inv;
    return mean;
}

double kd_loss_value(const Tensor& p, const Tensor& logits, double temperature) {
    check_temperature(temperature);
    if (!p.same_shape(logits)) {
        throw ShapeError("kd_loss width mismatch: teacher " + p.shape_string() + " vs student " + logits.shape_string());
    }
    check_distribution(p);
    const Tensor log_q = row_log_softmax(scaled(logits, temperature));
    double kl = 0.0;
    for (std::size_t c = 0; c < p.size(); ++c)
        if (p[c] > 0.0) kl += p[c] * (std::log(p[c]) - log_q[c]);
    // Gibbs: KL >= 0; negative values are rounding residue.
    kl = std::max(kl, 0.0);
    return temperature == 1.0 ? kl : kl * temperature * temperature;
}

Var kd_loss(const Tensor& p, Var logits, double temperature) {
    const double value = kd_loss_value(p, logits.value(), temperature);
    double p_total = 0.0;
    for (double v : p.data()) p_total += v;
    return logits.tape().record(Tensor(1, 1, value), {logits.id()}, [p, temperature, p_total](BackwardContext& ctx) {
        // d/dz_c = (q_c * sum(p) - p_c) / tau, times tau^2 when tau != 1.
        const Tensor q = row_softmax(scaled(ctx.input(0), temperature));
        const double factor = (temperature == 1.0 ? 1.0 : temperature) * ctx.grad()[0];
        Tensor& gi = ctx.input_grad(0);
        for (std::size_t c = 0; c < q.size(); ++c) gi[c] += factor * (q[c] * p_total - p[c]);
    });
}

double combined_loss(double l_sce, double l_kd, double kd_weight) {
    if (!(kd_weight >= 0.0)) throw ConfigError("KD weight must be non-negative");
    return l_sce + kd_weight * l_kd;
}

Var combined_loss(Var l_sce, Var l_kd, double kd_weight) {
    if (!(kd_weight >= 0.0)) throw ConfigError("KD weight must be non-negative");
    return add(l_sce, scale(l_kd, kd_weight));
}

namespace {

json distill_config_json(const DistillConfig& c, std::size_t teacher_count) {
    return {{"student", to_string(c.kind)}, {"hidden", c.hidden},         {"kd_weight", c.kd_weight},
            {"temperature", c.temperature}, {"epochs", c.epochs},         {"seed", c.seed},
            {"optimizer", to_json(c.optimizer)}, {"teachers", teacher_count}};
}

/// Shared loop. `soft` is null for the supervised baseline.
StudentRun run_student(std::span<const Subgraph> train, std::span<const Subgraph> val, std::size_t classes,
                       const std::vector<Tensor>* soft, std::size_t teacher_count, const DistillConfig& config) {
    if (train.empty()) throw ConfigError("student training split is empty");
    if (!(config.kd_weight >= 0.0)) throw ConfigError("KD weight must be non-negative");
    check_temperature(config.temperature);
    const std::size_t dim = train.front().dim();
    for (const auto* split : {&train, &val})
        for (const Subgraph& g : *split) {
            if (g.dim() != dim) throw ConfigError("subgraph '" + g.sample_id + "' has an inconsistent dimension");
            if (g.label >= classes) throw ConfigError("subgraph '" + g.sample_id + "' has a label outside the vocabulary");
        }

    StudentRun run{init_student(config.kind, dim, classes, config.hidden, config.seed), {}};
    StudentModel& model = run.model;
    model.train_config = distill_config_json(config, teacher_count);

    std::vector<Tensor> inputs;
    for (const Subgraph& g : train) inputs.push_back(g.content_features());

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
            const StudentOutput out = student_forward(model, leaves, tape.constant(inputs[idx]));
            Var loss = cross_entropy(out.logits, train[idx].label);
            if (soft) loss = combined_loss(loss, kd_loss((*soft)[idx], out.logits, config.temperature), config.kd_weight);
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
                preds.push_back(argmax(student_predict(model, g.content_features()).data()));
                labels.push_back(g.label);
            }
            m.val_micro_f1 = micro_f1(preds, labels);
        }
        run.history.push_back(m);
    }
    return run;
}

}  // namespace

StudentRun train_student(std::span<const Subgraph> train, std::span<const Subgraph> val,
                         std::span<const TeacherModel> teachers, const DistillConfig& config) {
    if (teachers.empty()) throw ConfigError("distillation needs at least one teacher");
    const std::size_t classes = teachers.front().classes;
    for (const TeacherModel& t : teachers)
        if (t.classes != classes || t.dim != teachers.front().dim) throw ConfigError("teachers disagree on dim or class count");
    if (config.kd_weight == 0.0) return run_student(train, val, classes, nullptr, teachers.size(), config);

    const SoftLabelCache cache = build_soft_label_cache(teachers, train, config.temperature, config.threads);
    return run_student(train, val, classes, &cache.rows, teachers.size(), config);
}

StudentRun train_supervised(std::span<const Subgraph> train, std::span<const Subgraph> val, std::size_t classes,
                            const DistillConfig& config) {
    DistillConfig c = config;
    c.kd_weight = 0.0;
    return run_student(train, val, classes, nullptr, 0, c);
}

Checkpoint to_checkpoint(const StudentModel& model, std::span<const EpochMetrics> history) {
    Checkpoint cp;
    const double kd_weight = model.train_config.is_object() ? model.train_config.value("kd_weight", 0.0) : 0.0;
    const std::string kind = to_string(model.kind);
    cp.metadata = {{"model", "student"},
                   {"name", kd_weight > 0.0 ? "teacher+" + kind : kind},
                   {"kind", kind},
                   {"dim", model.dim},
                   {"classes", model.classes},
                   {"hidden", model.hidden},
                   {"config", model.train_config},
                   {"history", history_to_json(history)}};
    cp.params = model.params;
    return cp;
}

StudentModel student_from_checkpoint(const Checkpoint& cp) {
    const json& m = cp.metadata;
    if (m.value("model", "") != "student") throw ConfigError("checkpoint does not hold a student");
    StudentModel model;
    try {
        model.kind = parse_student_kind(m.at("kind").get<std::string>());
        model.dim = m.at("dim").get<std::size_t>();
        model.classes = m.at("classes").get<std::size_t>();
        model.hidden = m.at("hidden").get<std::size_t>();
        model.train_config = m.value("config", json());
    } catch (const json::exception& e) {
        throw ConfigError(std::string("student checkpoint metadata: ") + e.what());
    }
    const StudentModel shape = init_student(model.kind, model.dim, model.classes, model.hidden, 0);
    if (cp.params.names != shape.params.names) throw ConfigError("student checkpoint tensor manifest mismatch");
    for (std::size_t i = 0; i < shape.params.size(); ++i)
        if (!cp.params.values[i].same_shape(shape.params.values[i]))
            throw ConfigError("student tensor '" + cp.params.names[i] + "' has the wrong shape");
    model.params = cp.params;
    return model;
}

SoftLabelCache build_soft_label_cache(std::span<const TeacherModel> teachers, std::span<const Subgraph> graphs,
                                      double temperature, std::size_t threads) {
    if (teachers.empty()) throw ConfigError("distillation needs at least one teacher");
    SoftLabelCache cache;
    cache.classes = teachers.front().classes;
    cache.ids.resize(graphs.size());
    cache.rows.resize(graphs.size());
    parallel_for(graphs.size(), threads, [&](std::size_t i) {
        cache.ids[i] = graphs[i].sample_id;
        cache.rows[i] = teacher_soft_labels(teachers, graphs[i], temperature);
    });
    return cache;
}

namespace {

constexpr std::string_view kSoftMagic = "GSLB";
constexpr std::uint32_t kSoftVersion = 1;

}  // namespace

std::string encode_soft_labels(const SoftLabelCache& cache) {
    if (cache.ids.size() != cache.rows.size()) throw InvariantError("soft-label cache ids and rows differ in length");
    ByteWriter w;
    w.bytes(kSoftMagic);
    w.u32(kSoftVersion);
    w.u64(cache.ids.size());
    w.u32(static_cast<std::uint32_t>(cache.classes));
    for (std::size_t i = 0; i < cache.ids.size(); ++i) {
        if (cache.ids[i].size() > std::numeric_limits<std::uint16_t>::max()) throw InputError("sample id too long");
        if (cache.rows[i].size() != cache.classes) throw ShapeError("soft-label row width does not match class count");
        w.u16(static_cast<std::uint16_t>(cache.ids[i].size()));
        w.bytes(cache.ids[i]);
        for (double v : cache.rows[i].data()) w.f64(v);
    }
    return w.take();
}

SoftLabelCache decode_soft_labels(std::string_view bytes) {
    ByteReader r(bytes, "soft-label cache");
    r.expect_magic(kSoftMagic);
    const std::size_t version_at = r.offset();
    if (const auto version = r.u32(); version != kSoftVersion) r.fail_at("unsupported version " + std::to_string(version), version_at);
    const std::uint64_t count = r.u64();
    SoftLabelCache cache;
    cache.classes = r.u32();
    for (std::uint64_t i = 0; i < count; ++i) {
        const std::uint16_t len = r.u16();
        cache.ids.emplace_back(r.bytes(len));
        Tensor row(1, cache.classes);
        for (double& v : row.data()) v = r.f64();
        cache.rows.push_back(std::move(row));
    }
    if (!r.at_end()) r.fail("trailing bytes after " + std::to_string(count) + " records");
    return cache;
}

void write_soft_labels(const SoftLabelCache& cache, const std::filesystem::path& path) {
    write_file(path, encode_soft_labels(cache));
}

SoftLabelCache read_soft_labels(const std::filesystem::path& path) { return decode_soft_labels(read_file(path)); }

}  // namespace gkd
