// Copyright (c) 2026, The gkd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>

namespace gkd {

/// Index of the largest entry; ties go to the lowest index.
std::size_t argmax(std::span<const double> values);

/// Micro-averaged F1 from global TP/FP/FN. Throws InputError on empty or
/// mismatched inputs.
double micro_f1(std::span<const std::size_t> predictions, std::span<const std::size_t> labels);

double accuracy(std::span<const std::size_t> predictions, std::span<const std::size_t> labels);

}  // namespace gkd
