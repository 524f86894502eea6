// Copyright (c) 2026, The gkd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "gkd/autodiff.h"

#include <functional>
#include <span>

namespace gkd {

/// Builds a scalar loss on `tape` from parameter leaves (one per checked tensor).
using ScalarFn = std::function<Var(Tape& tape, std::span<const Var> params)>;

/// Compares reverse-mode gradients of `f` against central differences with
/// step `eps` and returns max |analytic - numeric| / max(1e-8, |analytic| + |numeric|)
/// over every coordinate. Throws DeterminismError if two evaluations at the
/// unperturbed point differ and ConfigError if eps <= 0.
double gradcheck(const ScalarFn& f, std::span<const Tensor> params, double eps = 1e-5);

}  // namespace gkd
