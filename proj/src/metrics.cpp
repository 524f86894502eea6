// Copyright (c) 2026, The gkd Authors
// SPDX-License-Identifier: Apache-2.0

#include "gkd/metrics.h"

#include "gkd/errors.h"

#include <string>

namespace gkd {

namespace {

void check_inputs(std::span<const std::size_t> predictions, std::span<const std::size_t> labels) {
    if (predictions.size() != labels.size()) {
        throw InputError("got " + std::to_string(predictions.size()) + " predictions for " + std::to_string(labels.size()) +
                         " labels");
    }
    if (labels.empty()) throw InputError("cannot score an empty prediction set");
}

}  // namespace

std::size_t argmax(std::span<const double> values) {
    if (values.empty()) throw InputError("argmax of an empty row");
    std::size_t best = 0;
    for (std::size_t i = 1; i < values.size(); ++i)
        if (values[i] > values[best]) best = i;
    return best;
}

double micro_f1(std::span<const std::size_t> predictions, std::span<const std::size_t> labels) {
    check_inputs(predictions, labels);
    // Single-label: each miss is one FP (predicted class) and one FN (true class).
    std::size_t tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (predictions[i] == labels[i]) {
            ++tp;
        } else {
            ++fp;
            ++fn;
        }
    }
    return static_cast<double>(2 * tp) / static_cast<double>(2 * tp + fp + fn);
}

double accuracy(std::span<const std::size_t> predictions, std::span<const std::size_t> labels) {
    check_inputs(predictions, labels);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) correct += predictions[i] == labels[i];
    return static_cast<double>(correct) / static_cast<double>(labels.size());
}

}  // namespace gkd
