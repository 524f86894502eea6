// Copyright (c) 2026, The gkd Authors
// SPDX-License-Identifier: Apache-2.0

#include "gkd/optimizer.h"

#include "gkd/errors.h"

#include <cmath>

namespace gkd {

std::string to_string(OptimizerKind kind) { return kind == OptimizerKind::sgd ? "sgd" : "adam"; }

OptimizerKind parse_optimizer_kind(const std::string& text) {
    if (text == "sgd") return OptimizerKind::sgd;
    if (text == "adam") return OptimizerKind::adam;
    throw ConfigError("unknown optimizer '" + text + "' (expected sgd or adam)");
}

double default_learning_rate(OptimizerKind kind) { return kind == OptimizerKind::sgd ? 0.01 : 0.001; }

Optimizer::Optimizer(OptimizerConfig config) : config_(config) {
    if (!(config_.learning_rate >= 0.0) || !std::isfinite(config_.learning_rate)) {
        throw ConfigError("learning rate must be a finite non-negative number");
    }
}

void Optimizer::step(std::span<Tensor> params, std::span<const Tensor> grads) {
    if (params.size() != grads.size()) {
        throw ShapeError("optimizer got " + std::to_string(params.size()) + " parameters but " +
                         std::to_string(grads.size()) + " gradients");
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (!params[i].same_shape(grads[i])) {
            throw ShapeError("parameter " + std::to_string(i) + " is " + params[i].shape_string() +
                             " but its gradient is " + grads[i].shape_string());
        }
    }
    if (config_.kind == OptimizerKind::adam) {
        if (m_.empty()) {
            for (const Tensor& p : params) {
                m_.emplace_back(p.rows(), p.cols());
                v_.emplace_back(p.rows(), p.cols());
            }
        } else if (m_.size() != params.size()) {
            throw ShapeError("optimizer moment count changed between steps");
        }
        for (std::size_t i = 0; i < params.size(); ++i)
            if (!m_[i].same_shape(params[i])) throw ShapeError("optimizer moment shape changed between steps");
    }

    ++steps_;
    const double lr = config_.learning_rate;
    if (config_.kind == OptimizerKind::sgd) {
        for (std::size_t i = 0; i < params.size(); ++i) {
            auto w = params[i].data();
            auto g = grads[i].data();
            for (std::size_t j = 0; j < w.size(); ++j) w[j] -= lr * g[j];
        }
        return;
    }

    const double b1 = config_.beta1, b2 = config_.beta2;
    const double t = static_cast<double>(steps_);
    const double c1 = 1.0 - std::pow(b1, t);
    const double c2 = 1.0 - std::pow(b2, t);
    for (std::size_t i = 0; i < params.size(); ++i) {
        auto w = params[i].data();
        auto g = grads[i].data();
        auto m = m_[i].data();
        auto v = v_[i].data();
        for (std::size_t j = 0; j < w.size(); ++j) {
            m[j] = b1 * m[j] + (1.0 - b1) * g[j];
            v[j] = b2 * v[j] + (1.0 - b2) * g[j] * g[j];
            const double m_hat = m[j] / c1;
            const double v_hat = v[j] / c2;
            w[j] -= lr * m_hat / (std::sqrt(v_hat) + config_.epsilon);
        }
    }
}

}  // namespace gkd
