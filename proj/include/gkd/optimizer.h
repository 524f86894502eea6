// Copyright (c) 2026, The gkd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "gkd/tensor.h"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace gkd {

enum class OptimizerKind { sgd, adam };

std::string to_string(OptimizerKind kind);
OptimizerKind parse_optimizer_kind(const std::string& text);

struct OptimizerConfig {
    OptimizerKind kind = OptimizerKind::adam;
    double learning_rate = 0.001;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

/// Conventional default learning rate for each optimizer kind.
double default_learning_rate(OptimizerKind kind);

/// Stateful SGD / Adam. Moments are created lazily on the first step and
/// must keep matching parameter shapes afterwards.
class Optimizer {
public:
    explicit Optimizer(OptimizerConfig config);

    /// Updates `params` in place. Throws ShapeError if any pair disagrees in shape.
    void step(std::span<Tensor> params, std::span<const Tensor> grads);

    std::uint64_t steps() const noexcept { return steps_; }
    const OptimizerConfig& config() const noexcept { return config_; }

private:
    OptimizerConfig config_;
    std::uint64_t steps_ = 0;
    std::vector<Tensor> m_;
    std::vector<Tensor> v_;
};

}  // namespace gkd
