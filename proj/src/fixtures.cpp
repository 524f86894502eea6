// Copyright (c) 2026, The gkd Authors
// SPDX-License-Identifier: Apache-2.0

#include "gkd/fixtures.h"

#include "gkd/distill.h"
#include "gkd/gradcheck.h"
#include "gkd/rng.h"
#include "gkd/student.h"
#include "gkd/teacher.h"

#include <cmath>

namespace gkd {

namespace {

Vector unit(Rng& rng, std::size_t dim) {
    Vector v(dim);
    double n = 0.0;
    for (double& x : v) {
        x = rng.normal();
        n += x * x;
    }
    for (double& x : v) x /= std::sqrt(n);
    return v;
}

/// Replaces every entry with N(0, scale^2) so biases are non-zero too.
void randomize(ParameterSet& params, Rng& rng, double scale) {
    for (Tensor& t : params.values)
        for (double& x : t.data()) x = scale * rng.normal();
}

Tensor random_distribution(Rng& rng, std::size_t classes) {
    Tensor p(1, classes);
    double total = 0.0;
    for (double& x : p.data()) total += (x = 0.1 + rng.uniform());
    for (double& x : p.data()) x /= total;
    return p;
}

}  // namespace

Subgraph fixture_subgraph(std::uint64_t seed, std::size_t commonsense, std::size_t dim, std::size_t classes) {
    Rng rng(seed);
    Subgraph g;
    g.sample_id = "fixture";
    g.label = static_cast<std::size_t>(rng.below(classes));
    g.group = "fixture";
    for (NodeKind kind : kContentKinds) g.nodes.push_back({kind, to_string(kind), unit(rng, dim), 0});
    for (std::size_t i = 0; i < commonsense; ++i)
        g.nodes.push_back({NodeKind::commonsense, triplet_id(i), unit(rng, dim), i});
    const std::size_t n = g.nodes.size();
    g.adjacency = Tensor(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double w = rng.uniform() < 0.25 ? 0.0 : rng.uniform();
            g.adjacency(i, j) = g.adjacency(j, i) = w;
        }
    return g;
}

std::vector<GradcheckResult> model_gradchecks(std::uint64_t seed, double eps) {
    constexpr std::size_t kDim = 5, kClasses = 3, kHidden = 4;
    std::vector<GradcheckResult> out;
    Rng rng(derive_seed(seed, 31));

    const Subgraph graph = fixture_subgraph(derive_seed(seed, 32), 2, kDim, kClasses);
    TeacherConfig tc;
    tc.hidden = kHidden;
    tc.head_hidden = kHidden;
    tc.seed = seed;
    TeacherModel teacher = init_teacher(kDim, kClasses, tc);
    randomize(teacher.params, rng, 0.5);
    const ScalarFn teacher_loss = [&graph](Tape& tape, std::span<const Var> params) {
        return cross_entropy_loss(teacher_logits(tape, params, graph), graph.label);
    };
    out.push_back({"teacher", gradcheck(teacher_loss, teacher.params.values, eps)});

    const Tensor content = graph.content_features();
    const Tensor soft = random_distribution(rng, kClasses);
    for (StudentKind kind : {StudentKind::mlp, StudentKind::transformer}) {
        StudentModel student = init_student(kind, kDim, kClasses, kHidden, seed);
        randomize(student.params, rng, 0.5);
        const ScalarFn loss = [&](Tape& tape, std::span<const Var> params) {
            const Var logits = student_forward(student, params, tape.constant(content)).logits;
            return combined_loss(cross_entropy_loss(logits, graph.label), kd_loss(soft, logits, 2.0), 0.7);
        };
        out.push_back({to_string(kind), gradcheck(loss, student.params.values, eps)});
    }
    return out;
}

}  // namespace gkd
