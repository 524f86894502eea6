// Copyright (c) 2026, The gkd Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "gkd/errors.h"
#include "gkd/tensor.h"

#include <string>
#include <vector>

namespace gkd {

/// Ordered, named collection of trainable tensors. Order is the checkpoint
/// manifest order and the optimizer's moment order.
struct ParameterSet {
    std::vector<std::string> names;
    std::vector<Tensor> values;

    std::size_t add(std::string name, Tensor value) {
        names.push_back(std::move(name));
        values.push_back(std::move(value));
        return values.size() - 1;
    }

    std::size_t index_of(const std::string& name) const {
        for (std::size_t i = 0; i < names.size(); ++i)
            if (names[i] == name) return i;
        throw MissingError("no parameter named '" + name + "'");
    }

    const Tensor& at(const std::string& name) const { return values[index_of(name)]; }
    Tensor& at(const std::string& name) { return values[index_of(name)]; }
    std::size_t size() const noexcept { return values.size(); }

    friend bool operator==(const ParameterSet&, const ParameterSet&) = default;
};

inline bool bitwise_equal(const ParameterSet& a, const ParameterSet& b) {
    if (a.names != b.names) return false;
    for (std::size_t i = 0; i < a.values.size(); ++i)
        if (!bitwise_equal(a.values[i], b.values[i])) return false;
    return true;
}

}  // namespace gkd
