// Copyright (c) 2026, The gkd Authors
// SPDX-License-Identifier: Apache-2.0

#include "gkd/student.h"

#include "gkd/errors.h"
#include "gkd/rng.h"
#include "gkd/teacher.h"

#include <cmath>

namespace gkd {

namespace {

constexpr std::size_t kTokens = 4;
constexpr std::uint64_t kInitStream = 11;

enum MlpSlot : std::size_t { kMlpW1, kMlpB1, kMlpW2, kMlpB2, kMlpSlots };
enum TransformerSlot : std::size_t { kKind, kWq, kWk, kWv, kFfW1, kFfB1, kFfW2, kFfB2, kOutW, kOutB, kTransformerSlots };

}  // namespace

std::string to_string(StudentKind kind) { return kind == StudentKind::mlp ? "mlp" : "transformer"; }

StudentKind parse_student_kind(std::string_view text) {
    if (text == "mlp") return StudentKind::mlp;
    if (text == "transformer" || text == "tiny-transformer") return StudentKind::transformer;
    throw ConfigError("unknown student kind '" + std::string(text) + "' (expected mlp or transformer)");
}

StudentModel init_student(StudentKind kind, std::size_t dim, std::size_t classes, std::size_t hidden, std::uint64_t seed) {
    if (dim == 0 || hidden == 0) throw ConfigError("student sizes must be positive");
    if (classes < 2) throw ConfigError("student needs at least 2 classes");
    StudentModel m;
    m.kind = kind;
    m.dim = dim;
    m.classes = classes;
    m.hidden = hidden;
    Rng rng(derive_seed(seed, kInitStream));
    if (kind == StudentKind::mlp) {
        m.params.add("w1", glorot_uniform(kTokens * dim, hidden, rng));
        m.params.add("b1", Tensor(1, hidden));
        m.params.add("w2", glorot_uniform(hidden, classes, rng));
        m.params.add("b2", Tensor(1, classes));
    } else {
        m.params.add("kind_embedding", glorot_uniform(kTokens, dim, rng));
        m.params.add("wq", glorot_uniform(dim, dim, rng));
        m.params.add("wk", glorot_uniform(dim, dim, rng));
        m.params.add("wv", glorot_uniform(dim, dim, rng));
        m.params.add("ff_w1", glorot_uniform(dim, hidden, rng));
        m.params.add("ff_b1", Tensor(1, hidden));
        m.params.add("ff_w2", glorot_uniform(hidden, dim, rng));
        m.params.add("ff_b2", Tensor(1, dim));
        m.params.add("out_w", glorot_uniform(dim, classes, rng));
        m.params.add("out_b", Tensor(1, classes));
    }
    return m;
}

StudentOutput student_forward(const StudentModel& model, std::span<const Var> params, Var content) {
    if (content.rows() != kTokens || content.cols() != model.dim) {
        throw ShapeError("student input must be 4x" + std::to_string(model.dim) + ", got " + content.value().shape_string());
    }
    if (model.kind == StudentKind::mlp) {
        if (params.size() != kMlpSlots) throw ConfigError("mlp student expects 4 parameter tensors");
        Var x = flatten(content);
        Var h = relu(add_row(matmul(x, params[kMlpW1]), params[kMlpB1]));
        return {add_row(matmul(h, params[kMlpW2]), params[kMlpB2]), std::nullopt};
    }

    if (params.size() != kTransformerSlots) throw ConfigError("transformer student expects 10 parameter tensors");
    Var h0 = add(content, params[kKind]);
    Var q = matmul(h0, params[kWq]);
    Var k = matmul(h0, params[kWk]);
    Var v = matmul(h0, params[kWv]);
    Var scores = scale(matmul(q, transpose(k)), 1.0 / std::sqrt(static_cast<double>(model.dim)));
    Var attention = row_softmax(scores);
    Var h1 = add(h0, matmul(attention, v));
    Var ff = add_row(matmul(relu(add_row(matmul(h1, params[kFfW1]), params[kFfB1])), params[kFfW2]), params[kFfB2]);
    Var h2 = add(h1, ff);
    Var logits = add_row(matmul(mean_rows(h2), params[kOutW]), params[kOutB]);
    return {logits, attention};
}

Tensor student_predict(const StudentModel& model, const Tensor& content) {
    Tape tape;
    std::vector<Var> vars;
    for (const Tensor& t : model.params.values) vars.push_back(tape.constant(t));
    return student_forward(model, vars, tape.constant(content)).logits.value();
}

}  // namespace gkd
