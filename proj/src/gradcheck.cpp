// Copyright (c) 2026, The gkd Authors
// SPDX-License-Identifier: Apache-2.0

#include "gkd/gradcheck.h"

#include "gkd/errors.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <vector>

namespace gkd {

namespace {

double evaluate(const ScalarFn& f, std::span<const Tensor> params) {
    Tape tape;
    std::vector<Var> leaves;
    leaves.reserve(params.size());
    for (const Tensor& p : params) leaves.push_back(tape.parameter(p));
    const Var loss = f(tape, leaves);
    if (loss.rows() != 1 || loss.cols() != 1) throw ShapeError("gradcheck function must return a 1x1 loss");
    return loss.value()[0];
}

}  // namespace

double gradcheck(const ScalarFn& f, std::span<const Tensor> params, double eps) {
    if (!(eps > 0.0)) throw ConfigError("gradcheck eps must be positive");

    std::vector<Tensor> analytic;
    double base = 0.0;
    {
        Tape tape;
        std::vector<Var> leaves;
        for (const Tensor& p : params) leaves.push_back(tape.parameter(p));
        const Var loss = f(tape, leaves);
        base = loss.value()[0];
        const GradientTable grads = backward(tape, loss);
        for (const Var& leaf : leaves) analytic.push_back(grads[leaf]);
    }
    if (std::bit_cast<std::uint64_t>(evaluate(f, params)) != std::bit_cast<std::uint64_t>(base)) {
        throw DeterminismError("gradcheck: two evaluations at the same point differ");
    }

    std::vector<Tensor> work(params.begin(), params.end());
    double worst = 0.0;
    for (std::size_t t = 0; t < work.size(); ++t) {
        for (std::size_t i = 0; i < work[t].size(); ++i) {
            const double orig = work[t][i];
            work[t][i] = orig + eps;
            const double plus = evaluate(f, work);
            work[t][i] = orig - eps;
            const double minus = evaluate(f, work);
            work[t][i] = orig;
            const double numeric = (plus - minus) / (2.0 * eps);
            const double a = analytic[t][i];
            const double err = std::abs(a - numeric) / std::max(1e-8, std::abs(a) + std::abs(numeric));
            worst = std::max(worst, err);
        }
    }
    return worst;
}

}  // namespace gkd
