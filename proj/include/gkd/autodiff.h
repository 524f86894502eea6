// Copyright (c) 2026, The gkd Authors
// SPDX-License-Identifier: Apache-2.0
//
// Reverse-mode differentiation over dense tensors.
//
// A Tape owns an append-only list of records. Leaves are created with
// Tape::parameter (gradient tracked) or Tape::constant (not tracked); every op
// below appends one record whose inputs necessarily precede it, so reverse
// iteration is a valid topological order. backward() visits each record once
// and accumulates gradients additively when a node has several consumers.

#pragma once

#include "gkd/tensor.h"

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace gkd {

using NodeId = std::size_t;

class Tape;
class GradientTable;

/// Handle to a tape node. Cheap to copy; valid while the tape is alive and uncleared.
class Var {
public:
    Var() = default;
    Var(Tape* tape, NodeId id) : tape_(tape), id_(id) {}

    NodeId id() const noexcept { return id_; }
    Tape& tape() const noexcept { return *tape_; }
    const Tensor& value() const;
    std::size_t rows() const { return value().rows(); }
    std::size_t cols() const { return value().cols(); }

private:
    Tape* tape_ = nullptr;
    NodeId id_ = 0;
};

/// Handed to a record's backward function.
class BackwardContext {
public:
    BackwardContext(const Tape& tape, NodeId self, const Tensor& grad, std::vector<Tensor>& grads)
        : tape_(tape), self_(self), grad_(grad), grads_(grads) {}

    const Tensor& grad() const noexcept { return grad_; }
    const Tensor& output() const;
    const Tensor& input(std::size_t i) const;
    bool needs_grad(std::size_t i) const;
    /// Gradient slot for input i, zero-initialised on first use.
    Tensor& input_grad(std::size_t i);

private:
    const Tape& tape_;
    NodeId self_;
    const Tensor& grad_;
    std::vector<Tensor>& grads_;
};

using BackwardFn = std::function<void(BackwardContext&)>;

class Tape {
public:
    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    Var parameter(Tensor value);
    Var constant(Tensor value);

    /// Appends an op record. `fn` is skipped during backward when no input needs a gradient.
    Var record(Tensor value, std::vector<NodeId> inputs, BackwardFn fn);

    const Tensor& value(NodeId id) const { return records_.at(id).value; }
    bool requires_grad(NodeId id) const { return records_.at(id).requires_grad; }
    std::size_t size() const noexcept { return records_.size(); }
    void clear() { records_.clear(); }

private:
    friend class BackwardContext;
    friend GradientTable backward(const Tape&, Var);

    struct Record {
        Tensor value;
        std::vector<NodeId> inputs;
        BackwardFn backward;
        bool requires_grad = false;
    };
    std::vector<Record> records_;
};

/// Gradients indexed by node id. Nodes that did not influence the loss read as zeros.
class GradientTable {
public:
    GradientTable(const Tape& tape, std::vector<Tensor> grads) : tape_(&tape), grads_(std::move(grads)) {}
    Tensor operator[](Var v) const { return at(v.id()); }
    Tensor at(NodeId id) const;

private:
    const Tape* tape_;
    std::vector<Tensor> grads_;
};

/// Reverse pass from a 1x1 loss. Throws ShapeError if `loss` is not scalar.
GradientTable backward(const Tape& tape, Var loss);

// Differentiable ops. Each checks shapes (ShapeError) and finiteness of its
// output (NumericError).
Var matmul(Var a, Var b);
Var transpose(Var a);
Var add(Var a, Var b);
/// x (m x n) plus a 1 x n bias broadcast over rows.
Var add_row(Var x, Var bias);
Var scale(Var x, double factor);
Var relu(Var x);
/// Column-wise mean over rows: m x n -> 1 x n.
Var mean_rows(Var x);
/// Sum of all entries: -> 1 x 1.
Var sum(Var x);
/// Row-major reshape to 1 x (rows*cols).
Var flatten(Var x);
Var row_softmax(Var x);
/// -log softmax(logits)[label] for a 1 x C row. Throws InputError on a bad label.
Var cross_entropy(Var logits, std::size_t label);

}  // namespace gkd
