// Copyright (c) 2026, The gkd Authors
// SPDX-License-Identifier: Apache-2.0

#include "gkd/autodiff.h"

#include "gkd/errors.h"

#include <algorithm>
#include <cmath>

namespace gkd {

const Tensor& Var::value() const { return tape_->value(id_); }

const Tensor& BackwardContext::output() const { return tape_.records_[self_].value; }

const Tensor& BackwardContext::input(std::size_t i) const {
    return tape_.records_[tape_.records_[self_].inputs[i]].value;
}

bool BackwardContext::needs_grad(std::size_t i) const {
    return tape_.records_[tape_.records_[self_].inputs[i]].requires_grad;
}

Tensor& BackwardContext::input_grad(std::size_t i) {
    const NodeId id = tape_.records_[self_].inputs[i];
    Tensor& g = grads_[id];
    if (g.empty() && !tape_.records_[id].value.empty()) {
        const Tensor& v = tape_.records_[id].value;
        g = Tensor(v.rows(), v.cols());
    }
    return g;
}

Var Tape::parameter(Tensor value) {
    check_finite(value, "parameter");
    records_.push_back({std::move(value), {}, {}, true});
    return Var(this, records_.size() - 1);
}

Var Tape::constant(Tensor value) {
    check_finite(value, "constant");
    records_.push_back({std::move(value), {}, {}, false});
    return Var(this, records_.size() - 1);
}

Var Tape::record(Tensor value, std::vector<NodeId> inputs, BackwardFn fn) {
    bool needs = false;
    for (NodeId in : inputs) {
        if (in >= records_.size()) throw InvariantError("tape record references a later node");
        needs = needs || records_[in].requires_grad;
    }
    records_.push_back({std::move(value), std::move(inputs), needs ? std::move(fn) : BackwardFn{}, needs});
    return Var(this, records_.size() - 1);
}

Tensor GradientTable::at(NodeId id) const {
    if (id < grads_.size() && !grads_[id].empty()) return grads_[id];
    const Tensor& v = tape_->value(id);
    return Tensor(v.rows(), v.cols());
}

GradientTable backward(const Tape& tape, Var loss) {
    const Tensor& lv = tape.value(loss.id());
    if (lv.rows() != 1 || lv.cols() != 1) {
        throw ShapeError("backward requires a 1x1 loss, got " + lv.shape_string());
    }
    std::vector<Tensor> grads(tape.size());
    grads[loss.id()] = Tensor(1, 1, 1.0);
    for (NodeId id = loss.id() + 1; id-- > 0;) {
        const auto& rec = tape.records_[id];
        if (!rec.backward || grads[id].empty()) continue;
        // Inputs always precede `id`, so this slot is not written while in use.
        BackwardContext ctx(tape, id, grads[id], grads);
        rec.backward(ctx);
    }
    return GradientTable(tape, std::move(grads));
}

namespace {

Var checked(Tape& tape, Tensor value, std::vector<NodeId> inputs, BackwardFn fn, const char* op) {
    check_finite(value, op);
    return tape.record(std::move(value), std::move(inputs), std::move(fn));
}

void require_same_tape(Var a, Var b) {
    if (&a.tape() != &b.tape()) throw InvariantError("operands live on different tapes");
}

void accumulate(Tensor& dst, const Tensor& src) {
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

}  // namespace

Var matmul(Var a, Var b) {
    require_same_tape(a, b);
    return checked(a.tape(), gkd::matmul(a.value(), b.value()), {a.id(), b.id()},
                   [](BackwardContext& ctx) {
                       if (ctx.needs_grad(0)) accumulate(ctx.input_grad(0), gkd::matmul(ctx.grad(), gkd::transpose(ctx.input(1))));
                       if (ctx.needs_grad(1)) accumulate(ctx.input_grad(1), gkd::matmul(gkd::transpose(ctx.input(0)), ctx.grad()));
                   },
                   "matmul");
}

Var transpose(Var a) {
    return checked(a.tape(), gkd::transpose(a.value()), {a.id()},
                   [](BackwardContext& ctx) { accumulate(ctx.input_grad(0), gkd::transpose(ctx.grad())); },
                   "transpose");
}

Var add(Var a, Var b) {
    require_same_tape(a, b);
    if (!a.value().same_shape(b.value())) {
        throw ShapeError("add shape mismatch: " + a.value().shape_string() + " + " + b.value().shape_string());
    }
    Tensor out = a.value();
    accumulate(out, b.value());
    return checked(a.tape(), std::move(out), {a.id(), b.id()},
                   [](BackwardContext& ctx) {
                       for (std::size_t i = 0; i < 2; ++i)
                           if (ctx.needs_grad(i)) accumulate(ctx.input_grad(i), ctx.grad());
                   },
                   "add");
}

Var add_row(Var x, Var bias) {
    require_same_tape(x, bias);
    const Tensor& xv = x.value();
    const Tensor& bv = bias.value();
    if (bv.rows() != 1 || bv.cols() != xv.cols()) {
        throw ShapeError("add_row shape mismatch: " + xv.shape_string() + " + " + bv.shape_string());
    }
    Tensor out = xv;
    for (std::size_t r = 0; r < out.rows(); ++r)
        for (std::size_t c = 0; c < out.cols(); ++c) out(r, c) += bv[c];
    return checked(x.tape(), std::move(out), {x.id(), bias.id()},
                   [](BackwardContext& ctx) {
                       const Tensor& g = ctx.grad();
                       if (ctx.needs_grad(0)) accumulate(ctx.input_grad(0), g);
                       if (ctx.needs_grad(1)) {
                           Tensor& gb = ctx.input_grad(1);
                           for (std::size_t r = 0; r < g.rows(); ++r)
                               for (std::size_t c = 0; c < g.cols(); ++c) gb[c] += g(r, c);
                       }
                   },
                   "add_row");
}

Var scale(Var x, double factor) {
    Tensor out = x.value();
    for (double& v : out.data()) v *= factor;
    return checked(x.tape(), std::move(out), {x.id()},
                   [factor](BackwardContext& ctx) {
                       Tensor& gi = ctx.input_grad(0);
                       const Tensor& g = ctx.grad();
                       for (std::size_t i = 0; i < g.size(); ++i) gi[i] += factor * g[i];
                   },
                   "scale");
}

Var relu(Var x) {
    Tensor out = x.value();
    for (double& v : out.data()) v = v > 0.0 ? v : 0.0;
    return checked(x.tape(), std::move(out), {x.id()},
                   [](BackwardContext& ctx) {
                       Tensor& gi = ctx.input_grad(0);
                       const Tensor& in = ctx.input(0);
                       const Tensor& g = ctx.grad();
                       for (std::size_t i = 0; i < g.size(); ++i)
                           if (in[i] > 0.0) gi[i] += g[i];
                   },
                   "relu");
}

Var mean_rows(Var x) {
    const Tensor& xv = x.value();
    if (xv.rows() == 0) throw InvariantError("mean_rows over an empty tensor");
    Tensor out(1, xv.cols());
    for (std::size_t r = 0; r < xv.rows(); ++r)
        for (std::size_t c = 0; c < xv.cols(); ++c) out[c] += xv(r, c);
    const double inv = 1.0 / static_cast<double>(xv.rows());
    for (double& v : out.data()) v *= inv;
    return checked(x.tape(), std::move(out), {x.id()},
                   [inv](BackwardContext& ctx) {
                       Tensor& gi = ctx.input_grad(0);
                       const Tensor& g = ctx.grad();
                       for (std::size_t r = 0; r < gi.rows(); ++r)
                           for (std::size_t c = 0; c < gi.cols(); ++c) gi(r, c) += g[c] * inv;
                   },
                   "mean_rows");
}

Var sum(Var x) {
    double total = 0.0;
    for (double v : x.value().data()) total += v;
    return checked(x.tape(), Tensor(1, 1, total), {x.id()},
                   [](BackwardContext& ctx) {
                       Tensor& gi = ctx.input_grad(0);
                       const double g = ctx.grad()[0];
                       for (double& v : gi.data()) v += g;
                   },
                   "sum");
}

Var flatten(Var x) {
    const Tensor& xv = x.value();
    Tensor out(1, xv.size(), std::vector<double>(xv.data().begin(), xv.data().end()));
    return checked(x.tape(), std::move(out), {x.id()},
                   [](BackwardContext& ctx) {
                       Tensor& gi = ctx.input_grad(0);
                       const Tensor& g = ctx.grad();
                       for (std::size_t i = 0; i < g.size(); ++i) gi[i] += g[i];
                   },
                   "flatten");
}

Var row_softmax(Var x) {
    return checked(x.tape(), gkd::row_softmax(x.value()), {x.id()},
                   [](BackwardContext& ctx) {
                       // dx_j = y_j (g_j - sum_k g_k y_k), per row.
                       const Tensor& y = ctx.output();
                       const Tensor& g = ctx.grad();
                       Tensor& gi = ctx.input_grad(0);
                       for (std::size_t r = 0; r < y.rows(); ++r) {
                           double dot = 0.0;
                           for (std::size_t c = 0; c < y.cols(); ++c) dot += g(r, c) * y(r, c);
                           for (std::size_t c = 0; c < y.cols(); ++c) gi(r, c) += y(r, c) * (g(r, c) - dot);
                       }
                   },
                   "row_softmax");
}

Var cross_entropy(Var logits, std::size_t label) {
    const Tensor& z = logits.value();
    if (z.rows() != 1) throw ShapeError("cross_entropy expects a 1xC row, got " + z.shape_string());
    if (label >= z.cols()) {
        throw InputError("label " + std::to_string(label) + " out of range for " + std::to_string(z.cols()) + " classes");
    }
    const Tensor logp = gkd::row_log_softmax(z);
    return checked(logits.tape(), Tensor(1, 1, -logp[label]), {logits.id()},
                   [label](BackwardContext& ctx) {
                       const Tensor p = gkd::row_softmax(ctx.input(0));
                       const double g = ctx.grad()[0];
                       Tensor& gi = ctx.input_grad(0);
                       for (std::size_t c = 0; c < p.size(); ++c) gi[c] += g * (p[c] - (c == label ? 1.0 : 0.0));
                   },
                   "cross_entropy");
}

}  // namespace gkd
